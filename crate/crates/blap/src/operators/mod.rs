//! Differential and curvature operators assembled as sparse operators.
//!
//! First-order operators (covariant derivative, exterior differential,
//! symmetrized gradient, divergence, function gradient) are direct stencil
//! discretizations. Every codifferential and the rough Laplacian are exact
//! discrete adjoints: transposes against the diagonal mass matrices. The
//! quadratic-form identity <Lap_B phi, phi> = |d phi|^2 + |delta phi|^2 and
//! all adjointness pairs then hold to rounding by construction.

pub mod derivatives;

use crate::error::{Error, Result};
use crate::fields::{sym_index, sym_pairs, DofLayout, Field, FieldRank};
use crate::manifold::{curvature_data, AxisTopology, CurvatureData, ManifoldModel};
use crate::sparse::{ComponentOp, Csr, LinOp};
use std::collections::HashMap;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BourguignonMode {
    Composition,
    Weitzenboeck,
}

impl BourguignonMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            BourguignonMode::Composition => "composition",
            BourguignonMode::Weitzenboeck => "weitzenboeck",
        }
    }
}

/// A sparse operator between DOF spaces, with its mass weights attached.
#[derive(Clone)]
pub struct SparseOperator {
    pub name: String,
    pub model: Arc<ManifoldModel>,
    pub domain: DofLayout,
    pub codomain: DofLayout,
    pub op: LinOp,
    /// Self-adjoint with respect to the weighted inner product.
    pub symmetric: bool,
    pub dom_mass: Arc<Vec<f64>>,
    pub cod_mass: Arc<Vec<f64>>,
}

impl SparseOperator {
    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        self.op.apply(x)
    }

    pub fn apply(&self, f: &Field) -> Result<Field> {
        if f.layout != self.domain {
            return Err(Error::LayoutMismatch {
                expected: format!("{:?}", self.domain),
                got: format!("{:?}", f.layout),
            });
        }
        Ok(Field {
            model: self.model.clone(),
            layout: self.codomain.clone(),
            values: self.op.apply(&f.values),
        })
    }

    /// Exact discrete adjoint with respect to the mass weights.
    pub fn adjoint(&self, name: &str) -> SparseOperator {
        let inv_dom: Vec<f64> = self.dom_mass.iter().map(|m| 1.0 / m).collect();
        let op = LinOp::Chain(vec![
            LinOp::Diag(Arc::new(inv_dom)),
            self.op.transpose(),
            LinOp::Diag(self.cod_mass.clone()),
        ]);
        SparseOperator {
            name: name.to_string(),
            model: self.model.clone(),
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            op,
            symmetric: self.symmetric,
            dom_mass: self.cod_mass.clone(),
            cod_mass: self.dom_mass.clone(),
        }
    }

    /// Materialize explicit COO entries (small models, cache export).
    pub fn to_triplets(&self) -> Vec<(usize, usize, f64)> {
        self.op.to_csr().to_triplets()
    }

    pub fn nrows(&self) -> usize {
        self.op.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.op.ncols()
    }

    /// Largest relative self-adjointness defect over seeded random pairs.
    pub fn self_adjointness_defect(&self, pairs: usize, seed: u64) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..pairs {
            let u = crate::fields::random_raw(&self.model, self.domain.rank, seed ^ (2 * k as u64));
            let v =
                crate::fields::random_raw(&self.model, self.domain.rank, seed ^ (2 * k as u64 + 1));
            let au = self.op.apply(&u.values);
            let av = self.op.apply(&v.values);
            let a = weighted_dot(&au, &v.values, &self.cod_mass);
            let b = weighted_dot(&u.values, &av, &self.dom_mass);
            let scale = weighted_dot(&au, &au, &self.cod_mass)
                .sqrt()
                .max(weighted_dot(&av, &av, &self.cod_mass).sqrt())
                .max(1e-300);
            let nu = weighted_dot(&u.values, &u.values, &self.dom_mass).sqrt();
            worst = worst.max((a - b).abs() / (scale * nu));
        }
        worst
    }
}

pub fn weighted_dot(a: &[f64], b: &[f64], mass: &[f64]) -> f64 {
    let v: Vec<f64> = a
        .iter()
        .zip(b)
        .zip(mass)
        .map(|((x, y), m)| x * y * m)
        .collect();
    crate::sparse::pairwise_sum(&v)
}

pub fn weighted_norm(a: &[f64], mass: &[f64]) -> f64 {
    weighted_dot(a, a, mass).sqrt()
}

/// Shared assembly context: frame derivative matrices per fold-parity class,
/// curvature data, and mass vectors for one catalog model.
pub struct Operators {
    pub model: Arc<ManifoldModel>,
    pub curv: Arc<CurvatureData>,
    frames_even: Vec<Arc<Csr>>,
    frames_odd: Vec<Arc<Csr>>,
    masses: HashMap<&'static str, Arc<Vec<f64>>>,
}

fn rank_key(rank: FieldRank) -> &'static str {
    rank.as_str()
}

impl Operators {
    pub fn new(model: &Arc<ManifoldModel>) -> Operators {
        let curv = Arc::new(curvature_data(model));
        let frames_even = derivatives::frame_derivatives(model, 1.0);
        let has_flip = model
            .axes
            .iter()
            .any(|a| matches!(a.topology, AxisTopology::Mirrored { sign_flip: true, .. }));
        let frames_odd = if has_flip {
            derivatives::frame_derivatives(model, -1.0)
        } else {
            frames_even.clone()
        };
        let mut masses = HashMap::new();
        for rank in [
            FieldRank::Scalar,
            FieldRank::OneForm,
            FieldRank::Sym2,
            FieldRank::Lambda2Cotangent,
            FieldRank::CotangentSym2,
        ] {
            let layout = DofLayout::new(rank, model);
            masses.insert(rank_key(rank), Arc::new(layout.mass_vector(model)));
        }
        Operators {
            model: model.clone(),
            curv,
            frames_even,
            frames_odd,
            masses,
        }
    }

    pub fn mass(&self, rank: FieldRank) -> Arc<Vec<f64>> {
        self.masses[rank_key(rank)].clone()
    }

    fn layout(&self, rank: FieldRank) -> DofLayout {
        DofLayout::new(rank, &self.model)
    }

    fn wrap(
        &self,
        name: &str,
        dom: FieldRank,
        cod: FieldRank,
        op: LinOp,
        symmetric: bool,
    ) -> SparseOperator {
        SparseOperator {
            name: name.to_string(),
            model: self.model.clone(),
            domain: self.layout(dom),
            codomain: self.layout(cod),
            op,
            symmetric,
            dom_mass: self.mass(dom),
            cod_mass: self.mass(cod),
        }
    }

    /// nabla: sym2 -> cotangent (x) sym2,
    /// (nabla_a phi)_ij = e_a(phi_ij) - Gamma^m_ai phi_mj - Gamma^m_aj phi_im.
    pub fn covariant_derivative(&self) -> SparseOperator {
        let n = self.model.n;
        let m = FieldRank::Sym2.components(n);
        let nodes = self.model.node_count;
        let out_comps = n * m;
        let mut mat_terms = Vec::new();
        for a in 0..n {
            for c in 0..m {
                mat_terms.push((a * m + c, c, 1.0, self.frames_even[a].clone()));
            }
        }
        let bsz = out_comps * m;
        let mut blocks = vec![0.0; nodes * bsz];
        for node in 0..nodes {
            let b = &mut blocks[node * bsz..(node + 1) * bsz];
            for a in 0..n {
                for (c, &(i, j)) in sym_pairs(n).iter().enumerate() {
                    let out = a * m + c;
                    for mp in 0..n {
                        b[out * m + sym_index(n, mp, j)] -= self.curv.gamma(node, a, i, mp);
                        b[out * m + sym_index(n, i, mp)] -= self.curv.gamma(node, a, j, mp);
                    }
                }
            }
        }
        let op = LinOp::Component(Arc::new(ComponentOp {
            node_count: nodes,
            in_comps: m,
            out_comps,
            mat_terms,
            blocks: Some(Arc::new(blocks)),
        }));
        self.wrap("covariant_derivative", FieldRank::Sym2, FieldRank::CotangentSym2, op, false)
    }

    /// Pointwise rearrangement (d phi)_ijk = (nabla_i phi)_jk - (nabla_j phi)_ik.
    fn antisym_map(&self) -> LinOp {
        let n = self.model.n;
        let m = FieldRank::Sym2.components(n);
        let in_comps = n * m;
        let out_comps = FieldRank::Lambda2Cotangent.components(n);
        let nodes = self.model.node_count;
        let bsz = out_comps * in_comps;
        let mut block = vec![0.0; bsz];
        let mut pair = 0;
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    let out = pair * n + k;
                    block[out * in_comps + i * m + sym_index(n, j, k)] += 1.0;
                    block[out * in_comps + j * m + sym_index(n, i, k)] -= 1.0;
                }
                pair += 1;
            }
        }
        let mut blocks = vec![0.0; nodes * bsz];
        for node in 0..nodes {
            blocks[node * bsz..(node + 1) * bsz].copy_from_slice(&block);
        }
        LinOp::Component(Arc::new(ComponentOp {
            node_count: nodes,
            in_comps,
            out_comps,
            mat_terms: vec![],
            blocks: Some(Arc::new(blocks)),
        }))
    }

    /// Induced exterior differential on sym2 viewed as cotangent-valued
    /// one-forms; vanishing characterizes Codazzi tensors.
    pub fn dnabla(&self) -> SparseOperator {
        let nabla = self.covariant_derivative();
        let op = LinOp::Chain(vec![self.antisym_map(), nabla.op]);
        self.wrap("dnabla", FieldRank::Sym2, FieldRank::Lambda2Cotangent, op, false)
    }

    /// Formal adjoint of dnabla (exact transpose against the mass weights);
    /// lands in the sym2 layout by construction.
    pub fn delta_nabla(&self) -> SparseOperator {
        self.dnabla().adjoint("delta_nabla")
    }

    /// Symmetrized covariant derivative of one-forms (Killing-type operator),
    /// (d0 alpha)_ij = ((nabla_i alpha)_j + (nabla_j alpha)_i) / 2.
    pub fn sym_gradient(&self) -> SparseOperator {
        let n = self.model.n;
        let m = FieldRank::Sym2.components(n);
        let nodes = self.model.node_count;
        let mut mat_terms = Vec::new();
        for (c, &(i, j)) in sym_pairs(n).iter().enumerate() {
            if i == j {
                mat_terms.push((c, i, 1.0, self.frames_odd[i].clone()));
            } else {
                mat_terms.push((c, j, 0.5, self.frames_odd[i].clone()));
                mat_terms.push((c, i, 0.5, self.frames_odd[j].clone()));
            }
        }
        let bsz = m * n;
        let mut blocks = vec![0.0; nodes * bsz];
        for node in 0..nodes {
            let b = &mut blocks[node * bsz..(node + 1) * bsz];
            for (c, &(i, j)) in sym_pairs(n).iter().enumerate() {
                for mp in 0..n {
                    b[c * n + mp] -=
                        0.5 * (self.curv.gamma(node, i, j, mp) + self.curv.gamma(node, j, i, mp));
                }
            }
        }
        let op = LinOp::Component(Arc::new(ComponentOp {
            node_count: nodes,
            in_comps: n,
            out_comps: m,
            mat_terms,
            blocks: Some(Arc::new(blocks)),
        }));
        self.wrap("sym_gradient", FieldRank::OneForm, FieldRank::Sym2, op, false)
    }

    /// The codifferential on sym2 fields viewed as bundle-valued one-forms:
    /// exact adjoint of the symmetrized covariant derivative. Equals -div
    /// up to discretization accuracy.
    pub fn divergence_codifferential(&self) -> SparseOperator {
        self.sym_gradient().adjoint("divergence_codifferential")
    }

    /// Rough (connection) Laplacian nabla* nabla on sym2.
    pub fn rough_laplacian(&self) -> SparseOperator {
        let nabla = self.covariant_derivative();
        let adj = nabla.adjoint("covariant_derivative_adjoint");
        let op = LinOp::Chain(vec![adj.op, nabla.op]);
        self.wrap("rough_laplacian", FieldRank::Sym2, FieldRank::Sym2, op, true)
    }

    fn curvature_action_blocks(&self, b_not_k: bool) -> Arc<Vec<f64>> {
        let n = self.model.n;
        let m = FieldRank::Sym2.components(n);
        let nodes = self.model.node_count;
        let bsz = m * m;
        let mut blocks = vec![0.0; nodes * bsz];
        for node in 0..nodes {
            let blk = &mut blocks[node * bsz..(node + 1) * bsz];
            for (c, &(i, j)) in sym_pairs(n).iter().enumerate() {
                // Ricci composition part: sym(phi Ric) for B, Ric phi + phi Ric for K.
                let ric_scale = if b_not_k { 0.5 } else { 1.0 };
                for mp in 0..n {
                    blk[c * m + sym_index(n, i, mp)] += ric_scale * self.curv.ric(node, mp, j);
                    blk[c * m + sym_index(n, mp, j)] += ric_scale * self.curv.ric(node, i, mp);
                }
                // Curvature contraction: slot order fixed so that B g = 0 and,
                // on constant curvature c, B phi = c (n phi - (tr phi) g);
                // see the unit tests against the pointwise oracle.
                let ro_scale = if b_not_k { 1.0 } else { 2.0 };
                for a in 0..n {
                    for l in 0..n {
                        blk[c * m + sym_index(n, l, a)] -=
                            ro_scale * self.curv.riem(node, a, i, j, l);
                    }
                }
            }
        }
        Arc::new(blocks)
    }

    /// Weitzenboeck curvature term of the Bourguignon Laplacian:
    /// B phi = phi o Ric - R(phi) (pointwise).
    pub fn weitzenboeck_b(&self) -> SparseOperator {
        let m = FieldRank::Sym2.components(self.model.n);
        let op = LinOp::Component(Arc::new(ComponentOp {
            node_count: self.model.node_count,
            in_comps: m,
            out_comps: m,
            mat_terms: vec![],
            blocks: Some(self.curvature_action_blocks(true)),
        }));
        self.wrap("weitzenboeck_b", FieldRank::Sym2, FieldRank::Sym2, op, true)
    }

    /// Weitzenboeck curvature term of the Lichnerowicz Laplacian:
    /// K phi = Ric o phi + phi o Ric - 2 R(phi) (pointwise).
    pub fn weitzenboeck_k(&self) -> SparseOperator {
        let m = FieldRank::Sym2.components(self.model.n);
        let op = LinOp::Component(Arc::new(ComponentOp {
            node_count: self.model.node_count,
            in_comps: m,
            out_comps: m,
            mat_terms: vec![],
            blocks: Some(self.curvature_action_blocks(false)),
        }));
        self.wrap("weitzenboeck_k", FieldRank::Sym2, FieldRank::Sym2, op, true)
    }

    /// The Bourguignon Laplacian, either as the literal composition
    /// delta d + d0 delta0 (quadratic-form identity exact) or through the
    /// Weitzenboeck decomposition nabla* nabla + B (trace blocks exactly
    /// invariant, metric exactly in the kernel).
    pub fn bourguignon(&self, mode: BourguignonMode) -> SparseOperator {
        let op = match mode {
            BourguignonMode::Composition => {
                let d1 = self.dnabla();
                let delta1 = d1.adjoint("delta_nabla");
                let d0 = self.sym_gradient();
                let delta0 = d0.adjoint("divergence_codifferential");
                LinOp::Sum(vec![
                    LinOp::Chain(vec![delta1.op, d1.op]),
                    LinOp::Chain(vec![d0.op, delta0.op]),
                ])
            }
            BourguignonMode::Weitzenboeck => {
                let rough = self.rough_laplacian();
                let b = self.weitzenboeck_b();
                LinOp::Sum(vec![rough.op, b.op])
            }
        };
        let name = format!("bourguignon_{}", mode.as_str());
        self.wrap(&name, FieldRank::Sym2, FieldRank::Sym2, op, true)
    }

    /// Lichnerowicz Laplacian nabla* nabla + K.
    pub fn lichnerowicz(&self) -> SparseOperator {
        let rough = self.rough_laplacian();
        let k = self.weitzenboeck_k();
        let op = LinOp::Sum(vec![rough.op, k.op]);
        self.wrap("lichnerowicz", FieldRank::Sym2, FieldRank::Sym2, op, true)
    }

    /// Gradient of scalar functions, frame components (grad f)_a = e_a(f).
    pub fn gradient(&self) -> SparseOperator {
        let n = self.model.n;
        let mat_terms = (0..n)
            .map(|a| (a, 0, 1.0, self.frames_even[a].clone()))
            .collect();
        let op = LinOp::Component(Arc::new(ComponentOp {
            node_count: self.model.node_count,
            in_comps: 1,
            out_comps: n,
            mat_terms,
            blocks: None,
        }));
        self.wrap("gradient", FieldRank::Scalar, FieldRank::OneForm, op, false)
    }

    /// Ordinary function Laplacian -div grad = grad* grad.
    pub fn function_laplacian(&self) -> SparseOperator {
        let grad = self.gradient();
        let adj = grad.adjoint("gradient_adjoint");
        let op = LinOp::Chain(vec![adj.op, grad.op]);
        self.wrap("function_laplacian", FieldRank::Scalar, FieldRank::Scalar, op, true)
    }

    /// Direct divergence (div phi)_j = sum_i (nabla_i phi)_ij; defines the
    /// TT constraint.
    pub fn divergence(&self) -> SparseOperator {
        let n = self.model.n;
        let m = FieldRank::Sym2.components(n);
        let nodes = self.model.node_count;
        let in_comps = n * m;
        let bsz = n * in_comps;
        let mut block = vec![0.0; bsz];
        for k in 0..n {
            for i in 0..n {
                block[k * in_comps + i * m + sym_index(n, i, k)] += 1.0;
            }
        }
        let mut blocks = vec![0.0; nodes * bsz];
        for node in 0..nodes {
            blocks[node * bsz..(node + 1) * bsz].copy_from_slice(&block);
        }
        let contract = LinOp::Component(Arc::new(ComponentOp {
            node_count: nodes,
            in_comps,
            out_comps: n,
            mat_terms: vec![],
            blocks: Some(Arc::new(blocks)),
        }));
        let nabla = self.covariant_derivative();
        let op = LinOp::Chain(vec![contract, nabla.op]);
        self.wrap("divergence", FieldRank::Sym2, FieldRank::OneForm, op, false)
    }
}

/// |d phi| / |phi| in the weighted norms.
pub fn codazzi_residual(ops: &Operators, phi: &Field) -> Result<f64> {
    let norm = phi.norm();
    if norm == 0.0 {
        return Err(Error::UndefinedResidual);
    }
    let d1 = ops.dnabla();
    let dphi = d1.apply(phi)?;
    Ok(dphi.norm() / norm)
}

/// (|d phi| / |phi|, |delta phi| / |phi|); both vanish exactly on harmonic
/// (closed and coclosed) fields.
pub fn harmonic_residual(ops: &Operators, phi: &Field) -> Result<(f64, f64)> {
    let norm = phi.norm();
    if norm == 0.0 {
        return Err(Error::UndefinedResidual);
    }
    let d1 = ops.dnabla();
    let delta0 = ops.divergence_codifferential();
    let dphi = d1.apply(phi)?;
    let del = delta0.apply(phi)?;
    Ok((dphi.norm() / norm, del.norm() / norm))
}

/// Two routes to the quadratic form of K: (a) the assembled operator,
/// (b) the principal-axis expression: diagonalize phi at each node and
/// integrate sum_{i != j} sec(u_i, u_j) (lambda_i - lambda_j)^2.
pub fn k_quadratic_form_check(ops: &Operators, phi: &Field) -> Result<(f64, f64)> {
    if phi.layout.rank != FieldRank::Sym2 {
        return Err(Error::InvalidInput("sym2 field required".into()));
    }
    let k = ops.weitzenboeck_k();
    let kphi = k.apply(phi)?;
    let a = crate::fields::inner_product_global(&kphi, phi)?;

    let n = phi.layout.n;
    let model = &phi.model;
    let curv = &ops.curv;
    let mut contrib = vec![0.0; model.node_count];
    for node in 0..model.node_count {
        let mut mat = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                mat[(i, j)] = phi.get(node, sym_index(n, i, j));
            }
        }
        let eig = nalgebra::SymmetricEigen::new(mat);
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let ui = eig.eigenvectors.column(i);
                let uj = eig.eigenvectors.column(j);
                // sec(u_i ^ u_j) = g(R(u_i, u_j) u_j, u_i) on the eigenbasis
                let mut sec = 0.0;
                for a1 in 0..n {
                    for b1 in 0..n {
                        for c1 in 0..n {
                            for d1 in 0..n {
                                sec += curv.riem(node, a1, b1, c1, d1)
                                    * ui[a1]
                                    * uj[b1]
                                    * uj[c1]
                                    * ui[d1];
                            }
                        }
                    }
                }
                let dl = eig.eigenvalues[i] - eig.eigenvalues[j];
                s += sec * dl * dl;
            }
        }
        contrib[node] = model.weights[node] * s;
    }
    let b = crate::sparse::pairwise_sum(&contrib);
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{
        inner_product_global, metric_field, random_band_limited, random_raw, sample_field,
        trace_field, tracefree_part,
    };
    use crate::manifold::{build_sphere2, build_sphere3, build_torus};
    use std::f64::consts::PI;

    fn torus2() -> Arc<ManifoldModel> {
        Arc::new(build_torus(2, &[2.0 * PI, 2.0 * PI], &[16, 16]).unwrap())
    }

    fn sphere2(nt: usize, np: usize) -> Arc<ManifoldModel> {
        Arc::new(build_sphere2(1.0, nt, np).unwrap())
    }

    fn sphere3() -> Arc<ManifoldModel> {
        Arc::new(build_sphere3(1.0, &[8, 8, 8]).unwrap())
    }

    fn rel_norm(ops: &SparseOperator, f: &Field, scale: f64) -> f64 {
        let out = ops.apply(f).unwrap();
        out.norm() / scale
    }

    #[test]
    fn metric_is_parallel_everywhere() {
        for m in [torus2(), sphere2(16, 16), sphere3()] {
            let ops = Operators::new(&m);
            let nabla = ops.covariant_derivative();
            let g = metric_field(&m);
            let r = rel_norm(&nabla, &g, g.norm());
            assert!(r < 1e-12, "|nabla g| = {r} on {:?}", m.kind);
        }
    }

    #[test]
    fn torus_covariant_derivative_is_spectral() {
        let m = torus2();
        let ops = Operators::new(&m);
        let nabla = ops.covariant_derivative();
        // phi with all components sin x
        let s = |x: &[f64]| x[0].sin();
        let phi = sample_field(&m, FieldRank::Sym2, &[&s, &s, &s]).unwrap();
        let out = nabla.apply(&phi).unwrap();
        // (nabla_1 phi)_ij = cos x, (nabla_2 phi)_ij = 0
        for node in 0..m.node_count {
            let c = m.node_coords(node)[0].cos();
            for comp in 0..3 {
                assert!((out.get(node, comp) - c).abs() < 1e-10);
                assert!(out.get(node, 3 + comp).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sphere2_connection_terms_at_a_node() {
        // constant-component traceless field diag(1,-1): the theta-derivative
        // vanishes and the connection contributes 2 cot(theta) to (nabla_2)_12.
        let m = sphere2(8, 8);
        let ops = Operators::new(&m);
        let nabla = ops.covariant_derivative();
        let phi = sample_field(
            &m,
            FieldRank::Sym2,
            &[&|_: &[f64]| 1.0, &|_: &[f64]| 0.0, &|_: &[f64]| -1.0],
        )
        .unwrap();
        let out = nabla.apply(&phi).unwrap();
        let node = 3 * 8 + 2;
        let theta = m.node_coords(node)[0];
        let cot = theta.cos() / theta.sin();
        // out comps: (a=1): comps 3 + {s11, s12, s22}
        let got = out.get(node, 3 + 1);
        assert!((got - 2.0 * cot).abs() < 1e-10, "got {got}, want {}", 2.0 * cot);
        assert!(out.get(node, 0).abs() < 1e-10);
        let n = out.norm();
        assert!(n > 1.0, "connection terms must make nabla phi nonzero");
    }

    #[test]
    fn dnabla_examples() {
        for m in [torus2(), sphere2(16, 16), sphere3()] {
            let ops = Operators::new(&m);
            let d1 = ops.dnabla();
            let g = metric_field(&m).scaled(2.5);
            assert!(rel_norm(&d1, &g, g.norm()) < 1e-12);
        }
        // Hessians on the flat torus are Codazzi: d(Hess sin x) = 0.
        let m = torus2();
        let ops = Operators::new(&m);
        let d1 = ops.dnabla();
        let hess = sample_field(
            &m,
            FieldRank::Sym2,
            &[&|x: &[f64]| -x[0].sin(), &|_: &[f64]| 0.0, &|_: &[f64]| 0.0],
        )
        .unwrap();
        assert!(rel_norm(&d1, &hess, hess.norm()) < 1e-10);
        // Generic traceless field on the sphere is not Codazzi.
        let s = sphere2(16, 16);
        let ops_s = Operators::new(&s);
        let d1s = ops_s.dnabla();
        let phi = tracefree_part(&random_band_limited(&s, FieldRank::Sym2, 2, 7)).unwrap();
        assert!(rel_norm(&d1s, &phi, phi.norm()) > 1e-3);
    }

    #[test]
    fn adjointness_is_exact() {
        for m in [torus2(), sphere2(8, 8), sphere3()] {
            let ops = Operators::new(&m);
            let d1 = ops.dnabla();
            let delta1 = ops.delta_nabla();
            let nabla = ops.covariant_derivative();
            let nabla_adj = nabla.adjoint("nabla_star");
            for seed in 0..5 {
                let phi = random_raw(&m, FieldRank::Sym2, 100 + seed);
                let om = random_raw(&m, FieldRank::Lambda2Cotangent, 200 + seed);
                let lhs = inner_product_global(&d1.apply(&phi).unwrap(), &om).unwrap();
                let rhs = inner_product_global(&phi, &delta1.apply(&om).unwrap()).unwrap();
                let scale = d1.apply(&phi).unwrap().norm() * om.norm();
                assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0));

                let sig = random_raw(&m, FieldRank::CotangentSym2, 300 + seed);
                let lhs = inner_product_global(&nabla.apply(&phi).unwrap(), &sig).unwrap();
                let rhs = inner_product_global(&phi, &nabla_adj.apply(&sig).unwrap()).unwrap();
                let scale = nabla.apply(&phi).unwrap().norm() * sig.norm();
                assert!((lhs - rhs).abs() <= 1e-12 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn torus_codifferential_of_hessian() {
        // delta(Hess f) = -d(trace Hess f); for f = sin x this is the cos x one-form.
        let m = torus2();
        let ops = Operators::new(&m);
        let delta0 = ops.divergence_codifferential();
        let hess = sample_field(
            &m,
            FieldRank::Sym2,
            &[&|x: &[f64]| -x[0].sin(), &|_: &[f64]| 0.0, &|_: &[f64]| 0.0],
        )
        .unwrap();
        let out = delta0.apply(&hess).unwrap();
        for node in 0..m.node_count {
            let c = m.node_coords(node)[0].cos();
            assert!((out.get(node, 0) - c).abs() < 1e-10);
            assert!(out.get(node, 1).abs() < 1e-10);
        }
        let z = Field::zeros(&m, FieldRank::Sym2);
        assert!(delta0.apply(&z).unwrap().norm() == 0.0);
    }

    #[test]
    fn rough_laplacian_properties() {
        let m = torus2();
        let ops = Operators::new(&m);
        let rough = ops.rough_laplacian();
        let g = metric_field(&m);
        assert!(rel_norm(&rough, &g, g.norm()) < 1e-10);
        // (sin x) g is a |k|^2 = 1 mode of the flat rough Laplacian.
        let s = |x: &[f64]| x[0].sin();
        let z = |_: &[f64]| 0.0;
        let phi = sample_field(&m, FieldRank::Sym2, &[&s, &z, &s]).unwrap();
        let out = rough.apply(&phi).unwrap();
        let mut diff = out.clone();
        diff.axpy(-1.0, &phi);
        assert!(diff.norm() / phi.norm() < 1e-10);
        for seed in 0..20 {
            let f = random_raw(&m, FieldRank::Sym2, seed);
            let q = inner_product_global(&rough.apply(&f).unwrap(), &f).unwrap();
            assert!(q >= -1e-12 * f.norm().powi(2));
        }
    }

    #[test]
    fn curvature_terms_match_pointwise_oracle() {
        // B and K against the constant-curvature closed forms, plus B g = 0,
        // K g = 0 and the pointwise trace identities.
        for m in [torus2(), sphere2(8, 8), sphere3()] {
            let n = m.n as f64;
            let c = match m.kind {
                crate::manifold::ManifoldKind::FlatTorus => 0.0,
                _ => 1.0,
            };
            let ops = Operators::new(&m);
            let b = ops.weitzenboeck_b();
            let k = ops.weitzenboeck_k();
            let g = metric_field(&m);
            assert!(b.apply(&g).unwrap().norm() < 1e-12 * g.norm());
            assert!(k.apply(&g).unwrap().norm() < 1e-12 * g.norm());
            for seed in 0..5 {
                let phi = random_raw(&m, FieldRank::Sym2, 40 + seed);
                let tr = trace_field(&phi).unwrap();
                let bphi = b.apply(&phi).unwrap();
                let kphi = k.apply(&phi).unwrap();
                // oracle: B = c (n phi - tr g), K = 2c (n phi - tr g)
                let mut oracle = phi.scaled(c * n);
                for node in 0..m.node_count {
                    for i in 0..m.n {
                        let idx = sym_index(m.n, i, i);
                        let v = oracle.get(node, idx) - c * tr.get(node, 0);
                        oracle.set(node, idx, v);
                    }
                }
                let mut db = bphi.clone();
                db.axpy(-1.0, &oracle);
                assert!(db.norm() <= 1e-12 * phi.norm().max(1.0), "B oracle defect on {:?}", m.kind);
                let mut dk = kphi.clone();
                dk.axpy(-2.0, &oracle);
                assert!(dk.norm() <= 1e-12 * phi.norm().max(1.0), "K oracle defect on {:?}", m.kind);
                // pointwise traces vanish
                let tb = trace_field(&bphi).unwrap();
                let tk = trace_field(&kphi).unwrap();
                let scale = phi
                    .values
                    .iter()
                    .fold(0.0f64, |a, v| a.max(v.abs()))
                    .max(1.0);
                assert!(tb.values.iter().all(|v| v.abs() < 1e-12 * scale));
                assert!(tk.values.iter().all(|v| v.abs() < 1e-12 * scale));
            }
        }
    }

    #[test]
    fn sphere_traceless_eigenactions() {
        // On the unit 2-sphere B phi = 2 phi for traceless phi; on the unit
        // 3-sphere K phi = 6 phi.
        let s2 = sphere2(8, 8);
        let ops2 = Operators::new(&s2);
        let b = ops2.weitzenboeck_b();
        let phi = tracefree_part(&random_raw(&s2, FieldRank::Sym2, 3)).unwrap();
        let mut out = b.apply(&phi).unwrap();
        out.axpy(-2.0, &phi);
        assert!(out.norm() < 1e-12 * phi.norm());

        let s3 = sphere3();
        let ops3 = Operators::new(&s3);
        let k = ops3.weitzenboeck_k();
        let psi = tracefree_part(&random_raw(&s3, FieldRank::Sym2, 4)).unwrap();
        let mut out = k.apply(&psi).unwrap();
        out.axpy(-6.0, &psi);
        assert!(out.norm() < 1e-12 * psi.norm());

        // K(diag(1,-1)) = diag(4,-4) on the unit 2-sphere.
        let k2 = ops2.weitzenboeck_k();
        let d = sample_field(
            &s2,
            FieldRank::Sym2,
            &[&|_: &[f64]| 1.0, &|_: &[f64]| 0.0, &|_: &[f64]| -1.0],
        )
        .unwrap();
        let kd = k2.apply(&d).unwrap();
        assert!((kd.get(5, 0) - 4.0).abs() < 1e-13);
        assert!((kd.get(5, 2) + 4.0).abs() < 1e-13);
    }

    #[test]
    fn bourguignon_modes_and_metric_kernel() {
        let m = torus2();
        let ops = Operators::new(&m);
        let comp = ops.bourguignon(BourguignonMode::Composition);
        let weitz = ops.bourguignon(BourguignonMode::Weitzenboeck);
        // On the flat torus the two assemblies agree to rounding.
        for seed in 0..5 {
            let phi = random_band_limited(&m, FieldRank::Sym2, 3, seed);
            let a = comp.apply(&phi).unwrap();
            let mut d = weitz.apply(&phi).unwrap();
            d.axpy(-1.0, &a);
            assert!(d.norm() <= 1e-10 * phi.norm(), "defect {}", d.norm() / phi.norm());
        }
        let g = metric_field(&m).scaled(0.7);
        assert!(weitz.apply(&g).unwrap().norm() < 1e-10 * g.norm());
        assert!(comp.apply(&g).unwrap().norm() < 1e-10 * g.norm());

        // Pure-trace action: Lap_B(f g) = (lap f) g, exact for the
        // Weitzenboeck assembly.
        let f = crate::fields::named_scalar(&m, "sin_x_sin_y").unwrap();
        let lap = ops.function_laplacian();
        let lapf = lap.apply(&f).unwrap();
        let mut fg = Field::zeros(&m, FieldRank::Sym2);
        let mut target = Field::zeros(&m, FieldRank::Sym2);
        for node in 0..m.node_count {
            for i in 0..m.n {
                fg.set(node, sym_index(m.n, i, i), f.get(node, 0));
                target.set(node, sym_index(m.n, i, i), lapf.get(node, 0));
            }
        }
        let mut out = weitz.apply(&fg).unwrap();
        out.axpy(-1.0, &target);
        assert!(out.norm() <= 1e-8 * target.norm().max(1.0));
    }

    #[test]
    fn quadratic_form_identity_exact() {
        // <Lap_B phi, phi> = |d phi|^2 + |delta phi|^2 for the composition
        // assembly, by construction of the adjoints.
        for m in [torus2(), sphere2(8, 8), sphere3()] {
            let ops = Operators::new(&m);
            let comp = ops.bourguignon(BourguignonMode::Composition);
            let d1 = ops.dnabla();
            let delta0 = ops.divergence_codifferential();
            for seed in 0..5 {
                let phi = random_raw(&m, FieldRank::Sym2, 77 + seed);
                let lhs = inner_product_global(&comp.apply(&phi).unwrap(), &phi).unwrap();
                let r1 = d1.apply(&phi).unwrap().norm().powi(2);
                let r0 = delta0.apply(&phi).unwrap().norm().powi(2);
                let rhs = r1 + r0;
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0), "{:?}", m.kind);
                assert!(lhs >= -1e-12 * phi.norm().powi(2));
            }
        }
    }

    #[test]
    fn lichnerowicz_minus_bourguignon_on_traceless() {
        // (Lap_L - Lap_B) phi = n phi on unit-sphere traceless fields, an
        // exact pointwise identity of the two curvature terms.
        for (m, n) in [(sphere2(8, 8), 2.0), (sphere3(), 3.0)] {
            let ops = Operators::new(&m);
            let lb = ops.bourguignon(BourguignonMode::Weitzenboeck);
            let ll = ops.lichnerowicz();
            let g = metric_field(&m);
            assert!(ll.apply(&g).unwrap().norm() < 1e-10 * g.norm());
            let phi = tracefree_part(&random_band_limited(&m, FieldRank::Sym2, 2, 11)).unwrap();
            let mut diff = ll.apply(&phi).unwrap();
            diff.axpy(-1.0, &lb.apply(&phi).unwrap());
            diff.axpy(-n, &phi);
            assert!(diff.norm() <= 1e-10 * phi.norm(), "{:?}", m.kind);
        }
    }

    #[test]
    fn trace_identity_is_exact_for_weitzenboeck() {
        for m in [torus2(), sphere2(8, 8), sphere3()] {
            let ops = Operators::new(&m);
            let lb = ops.bourguignon(BourguignonMode::Weitzenboeck);
            let lap = ops.function_laplacian();
            for seed in 0..3 {
                let phi = random_raw(&m, FieldRank::Sym2, 500 + seed);
                let lhs = trace_field(&lb.apply(&phi).unwrap()).unwrap();
                let mut rhs = lap.apply(&trace_field(&phi).unwrap()).unwrap();
                rhs.axpy(-1.0, &lhs);
                assert!(
                    rhs.norm() <= 1e-10 * phi.norm().max(1.0),
                    "trace identity defect {} on {:?}",
                    rhs.norm(),
                    m.kind
                );
            }
        }
    }

    #[test]
    fn function_laplacian_examples() {
        let m = torus2();
        let ops = Operators::new(&m);
        let lap = ops.function_laplacian();
        let c = sample_field(&m, FieldRank::Scalar, &[&|_: &[f64]| 3.0]).unwrap();
        assert!(lap.apply(&c).unwrap().norm() < 1e-12);
        let f = crate::fields::named_scalar(&m, "sin_x").unwrap();
        let mut out = lap.apply(&f).unwrap();
        out.axpy(-1.0, &f);
        assert!(out.norm() <= 1e-10 * f.norm());
    }

    #[test]
    fn divergence_examples() {
        let m = torus2();
        let ops = Operators::new(&m);
        let div = ops.divergence();
        let g = metric_field(&m);
        assert!(div.apply(&g).unwrap().norm() < 1e-12 * g.norm());
        let phi = sample_field(
            &m,
            FieldRank::Sym2,
            &[&|x: &[f64]| x[0].sin(), &|_: &[f64]| 0.0, &|_: &[f64]| 0.0],
        )
        .unwrap();
        let out = div.apply(&phi).unwrap();
        for node in 0..m.node_count {
            let c = m.node_coords(node)[0].cos();
            assert!((out.get(node, 0) - c).abs() < 1e-10);
            assert!(out.get(node, 1).abs() < 1e-10);
        }
        let z = Field::zeros(&m, FieldRank::Sym2);
        assert_eq!(div.apply(&z).unwrap().norm(), 0.0);
    }

    #[test]
    fn residual_classifiers() {
        let m = torus2();
        let ops = Operators::new(&m);
        let g = metric_field(&m).scaled(1.7);
        let (cd, hd) = harmonic_residual(&ops, &g).unwrap();
        assert!(cd < 1e-12 && hd < 1e-12);
        // Hessian of sin x: Codazzi but not harmonic (nonconstant trace).
        let hess = sample_field(
            &m,
            FieldRank::Sym2,
            &[&|x: &[f64]| -x[0].sin(), &|_: &[f64]| 0.0, &|_: &[f64]| 0.0],
        )
        .unwrap();
        let (cd, hd) = harmonic_residual(&ops, &hess).unwrap();
        assert!(cd <= 1e-10, "codazzi residual {cd}");
        assert!(hd > 0.1, "delta residual {hd}");
        // Constant fields are parallel hence harmonic.
        let par = sample_field(
            &m,
            FieldRank::Sym2,
            &[&|_: &[f64]| 1.0, &|_: &[f64]| 0.0, &|_: &[f64]| 2.0],
        )
        .unwrap();
        let (cd, hd) = harmonic_residual(&ops, &par).unwrap();
        assert!(cd <= 1e-12 && hd <= 1e-12);
        let z = Field::zeros(&m, FieldRank::Sym2);
        assert!(matches!(
            codazzi_residual(&ops, &z),
            Err(Error::UndefinedResidual)
        ));
    }

    #[test]
    fn k_quadratic_form_two_routes() {
        let m = torus2();
        let ops = Operators::new(&m);
        let g = metric_field(&m);
        let (a, b) = k_quadratic_form_check(&ops, &g).unwrap();
        assert!(a.abs() < 1e-12 && b.abs() < 1e-12);
        let phi = random_raw(&m, FieldRank::Sym2, 8);
        let (a, b) = k_quadratic_form_check(&ops, &phi).unwrap();
        assert!(a.abs() < 1e-10 && b.abs() < 1e-10); // flat: sec = 0

        let s = sphere2(8, 8);
        let ops_s = Operators::new(&s);
        for seed in 0..10 {
            let phi = random_raw(&s, FieldRank::Sym2, 600 + seed);
            let (a, b) = k_quadratic_form_check(&ops_s, &phi).unwrap();
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "a={a} b={b}");
        }
    }

    #[test]
    fn self_adjointness_flagged_operators() {
        for m in [torus2(), sphere2(8, 8), sphere3()] {
            let ops = Operators::new(&m);
            for op in [
                ops.rough_laplacian(),
                ops.bourguignon(BourguignonMode::Composition),
                ops.bourguignon(BourguignonMode::Weitzenboeck),
                ops.lichnerowicz(),
                ops.function_laplacian(),
                ops.weitzenboeck_b(),
                ops.weitzenboeck_k(),
            ] {
                assert!(op.symmetric);
                let d = op.self_adjointness_defect(5, 42);
                assert!(d < 1e-12, "{} defect {d} on {:?}", op.name, m.kind);
            }
        }
    }
}
