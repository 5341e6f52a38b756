//! Discrete tensor fields with deterministic DOF layouts and the global
//! L^2 inner product.
//!
//! All tensor components are frame components (orthonormal frame), so traces
//! and pointwise contractions are plain component sums and the mass matrix is
//! diagonal: node weight times component multiplicity. Reduced component sets
//! are stored (i <= j for sym2, i < j for the antisymmetric pair); the
//! multiplicity factors reproduce the full contraction.

use crate::error::{Error, Result};
use crate::manifold::ManifoldModel;
use crate::sparse::pairwise_sum;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FieldRank {
    Scalar,
    OneForm,
    Sym2,
    /// Lambda^2 M tensor T*M values: stored for i < j in the antisymmetric pair.
    Lambda2Cotangent,
    /// T*M tensor S^2 M values (covariant derivatives of sym2 fields).
    CotangentSym2,
}

impl FieldRank {
    pub fn components(&self, n: usize) -> usize {
        match self {
            FieldRank::Scalar => 1,
            FieldRank::OneForm => n,
            FieldRank::Sym2 => n * (n + 1) / 2,
            FieldRank::Lambda2Cotangent => n * n * (n - 1) / 2,
            FieldRank::CotangentSym2 => n * n * (n + 1) / 2,
        }
    }

    /// Tensor order mod 2 decides the sign a component picks up when a
    /// stencil is folded across a pole (both frame legs flip there).
    pub fn parity(&self) -> f64 {
        match self {
            FieldRank::Scalar | FieldRank::Sym2 => 1.0,
            FieldRank::OneForm | FieldRank::Lambda2Cotangent | FieldRank::CotangentSym2 => -1.0,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            FieldRank::Scalar => "scalar",
            FieldRank::OneForm => "one-form",
            FieldRank::Sym2 => "sym2",
            FieldRank::Lambda2Cotangent => "lambda2-otimes-cotangent",
            FieldRank::CotangentSym2 => "cotangent-otimes-sym2",
        }
    }
}

/// Ordered (i <= j) component pairs of a sym2 field.
pub fn sym_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..n {
        for j in i..n {
            v.push((i, j));
        }
    }
    v
}

/// Storage slot of sym2 component (i, j) (order-insensitive).
pub fn sym_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // slots before row i: sum_{r<i} (n - r)
    i * n - i * (i + 1) / 2 + j
    // For n=3: (0,0)=0 (0,1)=1 (0,2)=2 (1,1)=3 (1,2)=4 (2,2)=5.
}

/// Ordered (i < j) antisymmetric pairs.
pub fn antisym_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            v.push((i, j));
        }
    }
    v
}

pub fn antisym_index(n: usize, i: usize, j: usize) -> (usize, f64) {
    assert_ne!(i, j);
    let (a, b, s) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
    let mut idx = 0;
    for p in 0..n {
        for q in p + 1..n {
            if (p, q) == (a, b) {
                return (idx, s);
            }
            idx += 1;
        }
    }
    unreachable!()
}

/// Deterministic node-major DOF layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofLayout {
    pub rank: FieldRank,
    pub n: usize,
    pub node_count: usize,
}

impl DofLayout {
    pub fn new(rank: FieldRank, model: &ManifoldModel) -> DofLayout {
        DofLayout {
            rank,
            n: model.n,
            node_count: model.node_count,
        }
    }

    pub fn components(&self) -> usize {
        self.rank.components(self.n)
    }

    pub fn dof(&self) -> usize {
        self.node_count * self.components()
    }

    /// Node-major index map.
    pub fn index(&self, node: usize, comp: usize) -> usize {
        debug_assert!(comp < self.components());
        node * self.components() + comp
    }

    /// Component multiplicity in the pointwise inner product. Symmetric
    /// tensor slots contract fully (2 per off-diagonal pair); the
    /// antisymmetric pair uses the alternating-form convention (one term per
    /// ordered i < j pair), which is what makes the Weitzenboeck
    /// decomposition of the composed Laplacian hold without spurious factors.
    pub fn multiplicity(&self, comp: usize) -> f64 {
        match self.rank {
            FieldRank::Scalar | FieldRank::OneForm => 1.0,
            FieldRank::Sym2 => {
                let (i, j) = sym_pairs(self.n)[comp];
                if i == j {
                    1.0
                } else {
                    2.0
                }
            }
            FieldRank::Lambda2Cotangent => 1.0,
            FieldRank::CotangentSym2 => {
                let m = FieldRank::Sym2.components(self.n);
                let (i, j) = sym_pairs(self.n)[comp % m];
                if i == j {
                    1.0
                } else {
                    2.0
                }
            }
        }
    }

    /// Diagonal mass vector: node weight times component multiplicity.
    pub fn mass_vector(&self, model: &ManifoldModel) -> Vec<f64> {
        let c = self.components();
        let mut m = vec![0.0; self.dof()];
        for node in 0..self.node_count {
            let w = model.weights[node];
            for comp in 0..c {
                m[self.index(node, comp)] = w * self.multiplicity(comp);
            }
        }
        m
    }

    pub fn component_label(&self, comp: usize) -> String {
        match self.rank {
            FieldRank::Scalar => "f".to_string(),
            FieldRank::OneForm => format!("a{}", comp + 1),
            FieldRank::Sym2 => {
                let (i, j) = sym_pairs(self.n)[comp];
                format!("s{}{}", i + 1, j + 1)
            }
            FieldRank::Lambda2Cotangent => {
                let pair = comp / self.n;
                let k = comp % self.n;
                let (i, j) = antisym_pairs(self.n)[pair];
                format!("w{}{}_{}", i + 1, j + 1, k + 1)
            }
            FieldRank::CotangentSym2 => {
                let m = FieldRank::Sym2.components(self.n);
                let a = comp / m;
                let (i, j) = sym_pairs(self.n)[comp % m];
                format!("d{}_{}{}", a + 1, i + 1, j + 1)
            }
        }
    }

    /// FNV-1a hash over the layout descriptor; used in the matrix cache header.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut feed = |x: u64| {
            h ^= x;
            h = h.wrapping_mul(0x100000001b3);
        };
        feed(self.rank as u64);
        feed(self.n as u64);
        feed(self.node_count as u64);
        h
    }
}

/// A tensor field: DOF vector plus layout plus the model it lives on.
#[derive(Debug, Clone)]
pub struct Field {
    pub model: Arc<ManifoldModel>,
    pub layout: DofLayout,
    pub values: Vec<f64>,
}

pub type ScalarField = Field;
pub type OneFormField = Field;
pub type SymFormField = Field;
pub type TStar2FormField = Field;

impl Field {
    pub fn zeros(model: &Arc<ManifoldModel>, rank: FieldRank) -> Field {
        let layout = DofLayout::new(rank, model);
        Field {
            model: model.clone(),
            layout: layout.clone(),
            values: vec![0.0; layout.dof()],
        }
    }

    pub fn from_values(model: &Arc<ManifoldModel>, rank: FieldRank, values: Vec<f64>) -> Field {
        let layout = DofLayout::new(rank, model);
        assert_eq!(values.len(), layout.dof());
        Field {
            model: model.clone(),
            layout,
            values,
        }
    }

    pub fn get(&self, node: usize, comp: usize) -> f64 {
        self.values[self.layout.index(node, comp)]
    }

    pub fn set(&mut self, node: usize, comp: usize, v: f64) {
        let i = self.layout.index(node, comp);
        self.values[i] = v;
    }

    pub fn scaled(&self, s: f64) -> Field {
        let mut f = self.clone();
        for v in &mut f.values {
            *v *= s;
        }
        f
    }

    pub fn axpy(&mut self, a: f64, other: &Field) {
        assert_eq!(self.layout, other.layout);
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }

    pub fn norm(&self) -> f64 {
        inner_product_global(self, self).unwrap().sqrt()
    }
}

fn check_same_space(u: &Field, w: &Field) -> Result<()> {
    if u.layout != w.layout || !Arc::ptr_eq(&u.model, &w.model) {
        return Err(Error::LayoutMismatch {
            expected: format!("{:?} on {}", u.layout, u.model.config_key()),
            got: format!("{:?} on {}", w.layout, w.model.config_key()),
        });
    }
    Ok(())
}

/// Pointwise evaluation of component functions at the grid nodes.
/// The functions receive the node's coordinates and must match the rank's
/// component count (sym2 order: (1,1),(1,2),...,(n,n); antisymmetric pairs
/// (1,2),(1,3),(2,3) each crossed with the cotangent slot).
pub fn sample_field(
    model: &Arc<ManifoldModel>,
    rank: FieldRank,
    component_functions: &[&dyn Fn(&[f64]) -> f64],
) -> Result<Field> {
    let layout = DofLayout::new(rank, model);
    if component_functions.len() != layout.components() {
        return Err(Error::InvalidInput(format!(
            "expected {} component functions for rank {}, got {}",
            layout.components(),
            rank.as_str(),
            component_functions.len()
        )));
    }
    let mut f = Field::zeros(model, rank);
    for node in 0..model.node_count {
        let x = model.node_coords(node);
        for (c, func) in component_functions.iter().enumerate() {
            f.set(node, c, func(&x));
        }
    }
    Ok(f)
}

/// Global L^2 product: sum over nodes of weight * sum_c m_c u_c w_c, with a
/// fixed-order pairwise-tree reduction.
pub fn inner_product_global(u: &Field, w: &Field) -> Result<f64> {
    check_same_space(u, w)?;
    let layout = &u.layout;
    let comps = layout.components();
    let mults: Vec<f64> = (0..comps).map(|c| layout.multiplicity(c)).collect();
    let mut contrib = vec![0.0; layout.node_count];
    for node in 0..layout.node_count {
        let mut s = 0.0;
        let base = node * comps;
        for c in 0..comps {
            s += mults[c] * u.values[base + c] * w.values[base + c];
        }
        contrib[node] = u.model.weights[node] * s;
    }
    Ok(pairwise_sum(&contrib))
}

/// Pointwise trace of a sym2 field (frame components: a plain sum).
pub fn trace_field(phi: &Field) -> Result<Field> {
    if phi.layout.rank != FieldRank::Sym2 {
        return Err(Error::InvalidInput("trace_field needs a sym2 field".into()));
    }
    let n = phi.layout.n;
    let mut out = Field::zeros(&phi.model, FieldRank::Scalar);
    for node in 0..phi.layout.node_count {
        let mut t = 0.0;
        for i in 0..n {
            t += phi.get(node, sym_index(n, i, i));
        }
        out.set(node, 0, t);
    }
    Ok(out)
}

/// phi minus (trace/n) g. Idempotent; the output trace vanishes pointwise.
pub fn tracefree_part(phi: &Field) -> Result<Field> {
    if phi.layout.rank != FieldRank::Sym2 {
        return Err(Error::InvalidInput("tracefree_part needs a sym2 field".into()));
    }
    let n = phi.layout.n;
    let mut out = phi.clone();
    for node in 0..phi.layout.node_count {
        let mut t = 0.0;
        for i in 0..n {
            t += phi.get(node, sym_index(n, i, i));
        }
        let shift = t / n as f64;
        for i in 0..n {
            let idx = sym_index(n, i, i);
            let v = out.get(node, idx) - shift;
            out.set(node, idx, v);
        }
    }
    Ok(out)
}

/// The metric as a sym2 field: frame components delta_ij at every node.
pub fn metric_field(model: &Arc<ManifoldModel>) -> Field {
    let n = model.n;
    let mut g = Field::zeros(model, FieldRank::Sym2);
    for node in 0..model.node_count {
        for i in 0..n {
            g.set(node, sym_index(n, i, i), 1.0);
        }
    }
    g
}

fn monomials(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    // all exponent vectors with total degree <= degree
    let mut out = vec![vec![0; dim]];
    for _ in 0..degree {
        let mut next = Vec::new();
        for m in &out {
            for d in 0..dim {
                let mut e = m.clone();
                e[d] += 1;
                next.push(e);
            }
        }
        out.extend(next);
        out.sort();
        out.dedup();
    }
    out
}

fn eval_monomial(expts: &[usize], x: &[f64]) -> f64 {
    let mut v = 1.0;
    for (d, &e) in expts.iter().enumerate() {
        for _ in 0..e {
            v *= x[d];
        }
    }
    v
}

/// Seeded random smooth band-limited field.
///
/// On tori: random Fourier combinations with wavenumbers capped at
/// min(degree, res/4) per axis. On spheres: restrictions of random ambient
/// polynomial tensor fields of the given degree, evaluated in the model's
/// frame. Both produce smooth fields whose resolved content is far below the
/// grid Nyquist scale, so discretization-tolerance assertions are meaningful.
pub fn random_band_limited(
    model: &Arc<ManifoldModel>,
    rank: FieldRank,
    degree: usize,
    seed: u64,
) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match model.kind {
        crate::manifold::ManifoldKind::FlatTorus => {
            let n = model.n;
            let comps = rank.components(n);
            let mut f = Field::zeros(model, rank);
            let caps: Vec<i64> = (0..n)
                .map(|a| (model.resolution[a] / 4).max(1).min(degree.max(1)) as i64)
                .collect();
            let mut modes: Vec<Vec<i64>> = vec![vec![]];
            for a in 0..n {
                let mut next = Vec::new();
                for m in &modes {
                    for k in -caps[a]..=caps[a] {
                        let mut e = m.clone();
                        e.push(k);
                        next.push(e);
                    }
                }
                modes = next;
            }
            for c in 0..comps {
                for m in &modes {
                    let amp_c: f64 = rng.gen_range(-1.0..1.0);
                    let amp_s: f64 = rng.gen_range(-1.0..1.0);
                    for node in 0..model.node_count {
                        let x = model.node_coords(node);
                        let phase: f64 = (0..n)
                            .map(|a| 2.0 * std::f64::consts::PI * m[a] as f64 * x[a]
                                / model.periods[a])
                            .sum();
                        let v = f.get(node, c) + amp_c * phase.cos() + amp_s * phase.sin();
                        f.set(node, c, v);
                    }
                }
            }
            f
        }
        _ => {
            let dim = model.ambient_dim;
            let mons = monomials(dim, degree);
            let n = model.n;
            let mut f = Field::zeros(model, rank);
            match rank {
                FieldRank::Scalar => {
                    let coef: Vec<f64> = (0..mons.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    for node in 0..model.node_count {
                        let p = model.ambient_point(node);
                        let v: f64 = mons
                            .iter()
                            .zip(&coef)
                            .map(|(m, c)| c * eval_monomial(m, p))
                            .sum();
                        f.set(node, 0, v);
                    }
                }
                FieldRank::OneForm => {
                    let coef: Vec<Vec<f64>> = (0..mons.len())
                        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
                        .collect();
                    for node in 0..model.node_count {
                        let p = model.ambient_point(node);
                        let mut amb = vec![0.0; dim];
                        for (m, c) in mons.iter().zip(&coef) {
                            let v = eval_monomial(m, p);
                            for d in 0..dim {
                                amb[d] += c[d] * v;
                            }
                        }
                        for a in 0..n {
                            let e = model.frame_vector_ambient(node, a);
                            let val: f64 = e.iter().zip(&amb).map(|(x, y)| x * y).sum();
                            f.set(node, a, val);
                        }
                    }
                }
                FieldRank::Sym2 => {
                    let coef: Vec<Vec<f64>> = (0..mons.len())
                        .map(|_| (0..dim * dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
                        .collect();
                    for node in 0..model.node_count {
                        let p = model.ambient_point(node);
                        let mut t = vec![0.0; dim * dim];
                        for (m, c) in mons.iter().zip(&coef) {
                            let v = eval_monomial(m, p);
                            for d in 0..dim * dim {
                                t[d] += c[d] * v;
                            }
                        }
                        for (comp, (i, j)) in sym_pairs(n).iter().enumerate() {
                            let ei = model.frame_vector_ambient(node, *i);
                            let ej = model.frame_vector_ambient(node, *j);
                            let mut v = 0.0;
                            for a in 0..dim {
                                for b in 0..dim {
                                    // symmetrized ambient tensor
                                    v += 0.5 * (t[a * dim + b] + t[b * dim + a]) * ei[a] * ej[b];
                                }
                            }
                            f.set(node, comp, v);
                        }
                    }
                }
                _ => {
                    // Higher-rank batteries only need exact-identity checks;
                    // raw random values are sufficient there.
                    return random_raw(model, rank, seed);
                }
            }
            f
        }
    }
}

/// Uniform random DOF values (no smoothness). Used where identities hold
/// exactly for arbitrary vectors (adjointness, pointwise trace checks).
pub fn random_raw(model: &Arc<ManifoldModel>, rank: FieldRank, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = Field::zeros(model, rank);
    for v in &mut f.values {
        *v = rng.gen_range(-1.0..1.0);
    }
    f
}

/// Parse a named scalar on a torus, e.g. "sin_x", "cos_2y", "sin_x_sin_y".
pub fn named_scalar(model: &Arc<ManifoldModel>, name: &str) -> Result<Field> {
    #[derive(Clone, Copy)]
    struct Term {
        cos: bool,
        mult: f64,
        axis: usize,
    }
    let mut terms: Vec<Term> = Vec::new();
    let toks: Vec<&str> = name.split('_').collect();
    if toks.len() % 2 != 0 {
        return Err(Error::InvalidInput(format!("cannot parse field name '{name}'")));
    }
    for pair in toks.chunks(2) {
        let cos = match pair[0] {
            "sin" => false,
            "cos" => true,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown function '{other}' in field name '{name}'"
                )))
            }
        };
        let arg = pair[1];
        let (mult_str, var) = arg.split_at(arg.len() - 1);
        let mult: f64 = if mult_str.is_empty() {
            1.0
        } else {
            mult_str.parse().map_err(|_| {
                Error::InvalidInput(format!("bad multiplier in field name '{name}'"))
            })?
        };
        let axis = match var {
            "x" => 0,
            "y" => 1,
            "z" => 2,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unknown variable '{var}' in field name '{name}'"
                )))
            }
        };
        if axis >= model.n {
            return Err(Error::InvalidInput(format!(
                "variable '{var}' outside manifold dimension {}",
                model.n
            )));
        }
        terms.push(Term { cos, mult, axis });
    }
    let mut f = Field::zeros(model, FieldRank::Scalar);
    for node in 0..model.node_count {
        let x = model.node_coords(node);
        let mut v = 1.0;
        for t in &terms {
            let arg = t.mult * x[t.axis];
            v *= if t.cos { arg.cos() } else { arg.sin() };
        }
        f.set(node, 0, v);
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{build_sphere2, build_torus};
    use std::f64::consts::PI;

    fn torus2() -> Arc<ManifoldModel> {
        Arc::new(build_torus(2, &[2.0 * PI, 2.0 * PI], &[16, 16]).unwrap())
    }

    #[test]
    fn layout_is_a_bijection() {
        let m = torus2();
        for rank in [
            FieldRank::Scalar,
            FieldRank::OneForm,
            FieldRank::Sym2,
            FieldRank::Lambda2Cotangent,
            FieldRank::CotangentSym2,
        ] {
            let layout = DofLayout::new(rank, &m);
            let mut seen = vec![false; layout.dof()];
            for node in 0..layout.node_count {
                for c in 0..layout.components() {
                    let i = layout.index(node, c);
                    assert!(!seen[i]);
                    seen[i] = true;
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn sym_index_order() {
        assert_eq!(sym_index(3, 0, 0), 0);
        assert_eq!(sym_index(3, 0, 1), 1);
        assert_eq!(sym_index(3, 2, 0), 2);
        assert_eq!(sym_index(3, 1, 1), 3);
        assert_eq!(sym_index(3, 1, 2), 4);
        assert_eq!(sym_index(3, 2, 2), 5);
        assert_eq!(antisym_index(3, 2, 1), (2, -1.0));
    }

    #[test]
    fn inner_product_examples() {
        // <sin x, sin x> on the (2pi)^2 torus is exactly 2 pi^2 on the grid.
        let m = torus2();
        let f = sample_field(&m, FieldRank::Scalar, &[&|x: &[f64]| x[0].sin()]).unwrap();
        let ip = inner_product_global(&f, &f).unwrap();
        assert!((ip - 2.0 * PI * PI).abs() / (2.0 * PI * PI) < 1e-12, "got {ip}");

        // <g, g> = n Vol on the unit 2-sphere.
        let s = Arc::new(build_sphere2(1.0, 16, 16).unwrap());
        let g = metric_field(&s);
        let ip = inner_product_global(&g, &g).unwrap();
        assert!((ip - 8.0 * PI).abs() / (8.0 * PI) < 1e-12);
        assert!((ip - 25.132741228718345).abs() < 1e-10);

        let z = Field::zeros(&s, FieldRank::Sym2);
        assert_eq!(inner_product_global(&z, &z).unwrap(), 0.0);
    }

    #[test]
    fn inner_product_rejects_mismatch() {
        let m = torus2();
        let f = Field::zeros(&m, FieldRank::Scalar);
        let g = Field::zeros(&m, FieldRank::Sym2);
        assert!(inner_product_global(&f, &g).is_err());
    }

    #[test]
    fn trace_and_tracefree() {
        let m = torus2();
        let g = metric_field(&m);
        let t = trace_field(&g).unwrap();
        for node in 0..m.node_count {
            assert_eq!(t.get(node, 0), 2.0);
        }
        let tf = tracefree_part(&g).unwrap();
        assert!(tf.values.iter().all(|v| v.abs() < 1e-15));

        // diag(2, 0) -> diag(1, -1)
        let phi = sample_field(
            &m,
            FieldRank::Sym2,
            &[&|_: &[f64]| 2.0, &|_: &[f64]| 0.0, &|_: &[f64]| 0.0],
        )
        .unwrap();
        let tf = tracefree_part(&phi).unwrap();
        assert_eq!(tf.get(0, 0), 1.0);
        assert_eq!(tf.get(0, 2), -1.0);
        // idempotent
        let tf2 = tracefree_part(&tf).unwrap();
        for (a, b) in tf.values.iter().zip(&tf2.values) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn tracefree_orthogonal_to_metric() {
        let m = torus2();
        let g = metric_field(&m);
        for seed in 0..100 {
            let phi = random_band_limited(&m, FieldRank::Sym2, 2, seed);
            let tf = tracefree_part(&phi).unwrap();
            let ip = inner_product_global(&tf, &g).unwrap();
            let scale = tf.norm() * g.norm();
            assert!(ip.abs() <= 1e-10 * scale.max(1e-300), "seed {seed}: {ip}");
        }
    }

    #[test]
    fn sample_count_mismatch_errors() {
        let m = torus2();
        let r = sample_field(&m, FieldRank::Sym2, &[&|_: &[f64]| 0.0]);
        assert!(r.is_err());
    }

    #[test]
    fn named_scalars_parse() {
        let m = torus2();
        let f = named_scalar(&m, "sin_x").unwrap();
        let x0 = m.node_coords(17)[0];
        assert!((f.get(17, 0) - x0.sin()).abs() < 1e-15);
        let g = named_scalar(&m, "cos_2y").unwrap();
        let y0 = m.node_coords(17)[1];
        assert!((g.get(17, 0) - (2.0 * y0).cos()).abs() < 1e-15);
        let h = named_scalar(&m, "sin_x_sin_y").unwrap();
        assert!((h.get(17, 0) - x0.sin() * y0.sin()).abs() < 1e-15);
        assert!(named_scalar(&m, "tanh_x").is_err());
    }

    #[test]
    fn metric_samples_as_identity() {
        let s = Arc::new(build_sphere2(1.0, 8, 8).unwrap());
        let g = metric_field(&s);
        for node in (0..s.node_count).step_by(5) {
            assert_eq!(g.get(node, sym_index(2, 0, 0)), 1.0);
            assert_eq!(g.get(node, sym_index(2, 0, 1)), 0.0);
        }
    }
}
