//! Discretized catalog manifolds: flat tori, round 2-spheres, round 3-spheres.
//!
//! Every model carries an analytic orthonormal frame, exact cell-integral
//! quadrature weights, the continuation rule that closes derivative stencils
//! across poles / degenerate circles, and closed-form connection and curvature
//! data. Nothing geometric is obtained by numerical differentiation.

use crate::error::{Error, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ManifoldKind {
    FlatTorus,
    RoundSphere2,
    RoundSphere3,
}

impl ManifoldKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ManifoldKind::FlatTorus => "flat-torus",
            ManifoldKind::RoundSphere2 => "round-sphere-2",
            ManifoldKind::RoundSphere3 => "round-sphere-3",
        }
    }
}

/// Topology of one grid axis, as consumed by the derivative assembly.
#[derive(Debug, Clone)]
pub enum AxisTopology {
    Periodic { length: f64 },
    /// Axis closed by folding across both degenerate ends. A ghost index
    /// `-1-t` maps to node index `t` with the listed `(axis, amount)` index
    /// shifts on the other axes; ghost `n+t` maps to `n-1-t` likewise.
    /// When `sign_flip` is set, field components gain a factor `(-1)^rank`
    /// per crossing (polar frames flip both legs at a pole).
    Mirrored {
        low_shift: Vec<(usize, usize)>,
        high_shift: Vec<(usize, usize)>,
        sign_flip: bool,
    },
}

#[derive(Debug, Clone)]
pub struct Axis {
    pub len: usize,
    pub spacing: f64,
    pub coords: Vec<f64>,
    pub topology: AxisTopology,
}

/// A discretized compact Riemannian manifold from the catalog.
#[derive(Debug)]
pub struct ManifoldModel {
    pub kind: ManifoldKind,
    /// Intrinsic dimension.
    pub n: usize,
    /// Torus periods (empty for spheres).
    pub periods: Vec<f64>,
    /// Sphere radius (1.0 placeholder for tori).
    pub radius: f64,
    pub resolution: Vec<usize>,
    pub axes: Vec<Axis>,
    pub node_count: usize,
    /// Quadrature weight per node, in volume units. Sums exactly to Vol(M).
    pub weights: Vec<f64>,
    /// Frame coefficients per node: e_a = sum_mu frame_coord[node][a][mu] d/dx^mu.
    frame_coord: Vec<f64>,
    /// Ambient embedding per node (R^n for tori, R^3 / R^4 for spheres).
    ambient: Vec<f64>,
    pub ambient_dim: usize,
    /// Ambient components of the frame vectors per node.
    frame_ambient: Vec<f64>,
    pub diameter: f64,
}

impl ManifoldModel {
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.n];
        for a in (0..self.n - 1).rev() {
            s[a] = s[a + 1] * self.axes[a + 1].len;
        }
        s
    }

    pub fn node_index(&self, idx: &[usize]) -> usize {
        let s = self.strides();
        idx.iter().zip(&s).map(|(i, st)| i * st).sum()
    }

    pub fn node_multi_index(&self, node: usize) -> Vec<usize> {
        let s = self.strides();
        let mut rem = node;
        let mut idx = vec![0usize; self.n];
        for a in 0..self.n {
            idx[a] = rem / s[a];
            rem %= s[a];
        }
        idx
    }

    pub fn node_coords(&self, node: usize) -> Vec<f64> {
        let idx = self.node_multi_index(node);
        (0..self.n).map(|a| self.axes[a].coords[idx[a]]).collect()
    }

    /// e_a expressed in coordinate partials at a node.
    pub fn frame_coeff(&self, node: usize, a: usize, mu: usize) -> f64 {
        self.frame_coord[(node * self.n + a) * self.n + mu]
    }

    pub fn ambient_point(&self, node: usize) -> &[f64] {
        &self.ambient[node * self.ambient_dim..(node + 1) * self.ambient_dim]
    }

    /// Ambient components of frame vector e_a at a node.
    pub fn frame_vector_ambient(&self, node: usize, a: usize) -> &[f64] {
        let d = self.ambient_dim;
        let base = (node * self.n + a) * d;
        &self.frame_ambient[base..base + d]
    }

    pub fn volume(&self) -> f64 {
        crate::sparse::pairwise_sum(&self.weights)
    }

    /// Analytic volume of the underlying manifold.
    pub fn volume_exact(&self) -> f64 {
        match self.kind {
            ManifoldKind::FlatTorus => self.periods.iter().product(),
            ManifoldKind::RoundSphere2 => 4.0 * PI * self.radius * self.radius,
            ManifoldKind::RoundSphere3 => 2.0 * PI * PI * self.radius.powi(3),
        }
    }

    /// Short textual key used in cache file names and reports.
    pub fn config_key(&self) -> String {
        let res: Vec<String> = self.resolution.iter().map(|r| r.to_string()).collect();
        match self.kind {
            ManifoldKind::FlatTorus => {
                let p: Vec<String> = self.periods.iter().map(|x| format!("{x:.12e}")).collect();
                format!("torus{}_p{}_r{}", self.n, p.join("x"), res.join("x"))
            }
            _ => format!(
                "{}_rad{:.12e}_r{}",
                self.kind.as_str(),
                self.radius,
                res.join("x")
            ),
        }
    }
}

/// Closed-form connection and curvature data in the orthonormal frame.
///
/// Index conventions, fixed by requiring sec = +1 on the unit sphere:
///   gamma(x, a, b, c) = g(nabla_{e_a} e_b, e_c)
///   riem(x, i, j, k, l) = g(R(e_i, e_j) e_k, e_l),
///     R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_{[X,Y]} Z
///   ric(x, i, j) = sum_a riem(x, a, i, j, a)
///   sec(x, i, j) = riem(x, i, j, j, i)
#[derive(Debug)]
pub struct CurvatureData {
    pub n: usize,
    pub node_count: usize,
    gamma: Vec<f64>,
    riem: Vec<f64>,
    ric: Vec<f64>,
    sec: Vec<f64>,
    pub k_min: f64,
}

impl CurvatureData {
    pub fn gamma(&self, node: usize, a: usize, b: usize, c: usize) -> f64 {
        let n = self.n;
        self.gamma[((node * n + a) * n + b) * n + c]
    }
    pub fn riem(&self, node: usize, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.riem[(((node * n + i) * n + j) * n + k) * n + l]
    }
    pub fn ric(&self, node: usize, i: usize, j: usize) -> f64 {
        self.ric[(node * self.n + i) * self.n + j]
    }
    pub fn sec(&self, node: usize, i: usize, j: usize) -> f64 {
        self.sec[(node * self.n + i) * self.n + j]
    }
}

fn check_resolution(res: &[usize], min: usize) -> Result<()> {
    for &r in res {
        if r < min {
            return Err(Error::InvalidConfig(format!(
                "resolution {r} below minimum {min}"
            )));
        }
    }
    Ok(())
}

/// Flat torus with selectable periods. The frame is the coordinate frame, so
/// all connection coefficients vanish and spectral differentiation makes the
/// discrete calculus exact on resolved Fourier modes.
pub fn build_torus(n: usize, periods: &[f64], resolution: &[usize]) -> Result<ManifoldModel> {
    if n != 2 && n != 3 {
        return Err(Error::InvalidConfig(format!("torus dimension {n} not in {{2,3}}")));
    }
    if periods.len() != n || resolution.len() != n {
        return Err(Error::InvalidConfig(
            "periods and resolution must each have n entries".into(),
        ));
    }
    for &p in periods {
        if !(p > 0.0) {
            return Err(Error::InvalidConfig(format!("non-positive period {p}")));
        }
    }
    check_resolution(resolution, 4)?;

    let axes: Vec<Axis> = (0..n)
        .map(|a| {
            let len = resolution[a];
            let h = periods[a] / len as f64;
            Axis {
                len,
                spacing: h,
                coords: (0..len).map(|j| j as f64 * h).collect(),
                topology: AxisTopology::Periodic { length: periods[a] },
            }
        })
        .collect();
    let node_count: usize = resolution.iter().product();
    let w: f64 = (0..n).map(|a| axes[a].spacing).product();
    let weights = vec![w; node_count];

    let mut frame_coord = vec![0.0; node_count * n * n];
    let mut frame_ambient = vec![0.0; node_count * n * n];
    let mut ambient = vec![0.0; node_count * n];
    let strides = {
        let mut s = vec![1usize; n];
        for a in (0..n - 1).rev() {
            s[a] = s[a + 1] * resolution[a + 1];
        }
        s
    };
    for node in 0..node_count {
        let mut rem = node;
        for a in 0..n {
            let idx = rem / strides[a];
            rem %= strides[a];
            ambient[node * n + a] = axes[a].coords[idx];
            frame_coord[(node * n + a) * n + a] = 1.0;
            frame_ambient[(node * n + a) * n + a] = 1.0;
        }
    }

    let diameter = 0.5 * periods.iter().map(|p| p * p).sum::<f64>().sqrt();
    Ok(ManifoldModel {
        kind: ManifoldKind::FlatTorus,
        n,
        periods: periods.to_vec(),
        radius: 1.0,
        resolution: resolution.to_vec(),
        axes,
        node_count,
        weights,
        frame_coord,
        ambient,
        ambient_dim: n,
        frame_ambient,
        diameter,
    })
}

/// Round 2-sphere on a latitude-longitude grid. Theta nodes sit half a step
/// off both poles; phi is periodic. Cell-integral weights make the volume sum
/// exact: w_j = r^2 (cos theta_j^- - cos theta_j^+) dphi = const * sin(theta_j).
pub fn build_sphere2(radius: f64, res_theta: usize, res_phi: usize) -> Result<ManifoldModel> {
    if !(radius > 0.0) {
        return Err(Error::InvalidConfig(format!("non-positive radius {radius}")));
    }
    if res_theta < 8 || res_phi < 8 {
        return Err(Error::InvalidConfig("sphere resolutions must be >= 8".into()));
    }
    if res_phi % 2 != 0 {
        return Err(Error::InvalidConfig(
            "res_phi must be even: the cross-pole continuation shifts phi by half a period".into(),
        ));
    }
    let n = 2;
    let h_t = PI / res_theta as f64;
    let h_p = 2.0 * PI / res_phi as f64;
    let theta_axis = Axis {
        len: res_theta,
        spacing: h_t,
        coords: (0..res_theta).map(|j| (j as f64 + 0.5) * h_t).collect(),
        topology: AxisTopology::Mirrored {
            low_shift: vec![(1, res_phi / 2)],
            high_shift: vec![(1, res_phi / 2)],
            sign_flip: true,
        },
    };
    let phi_axis = Axis {
        len: res_phi,
        spacing: h_p,
        coords: (0..res_phi).map(|k| k as f64 * h_p).collect(),
        topology: AxisTopology::Periodic { length: 2.0 * PI },
    };
    let node_count = res_theta * res_phi;

    let mut weights = vec![0.0; node_count];
    let mut frame_coord = vec![0.0; node_count * n * n];
    let mut ambient = vec![0.0; node_count * 3];
    let mut frame_ambient = vec![0.0; node_count * n * 3];
    for j in 0..res_theta {
        let theta = theta_axis.coords[j];
        let w = radius * radius * ((j as f64 * h_t).cos() - ((j + 1) as f64 * h_t).cos()) * h_p;
        for k in 0..res_phi {
            let phi = phi_axis.coords[k];
            let node = j * res_phi + k;
            weights[node] = w;
            // e_1 = (1/r) d_theta, e_2 = (1/(r sin theta)) d_phi
            frame_coord[(node * n) * n] = 1.0 / radius;
            frame_coord[(node * n + 1) * n + 1] = 1.0 / (radius * theta.sin());
            let (st, ct) = (theta.sin(), theta.cos());
            let (sp, cp) = (phi.sin(), phi.cos());
            ambient[node * 3] = radius * st * cp;
            ambient[node * 3 + 1] = radius * st * sp;
            ambient[node * 3 + 2] = radius * ct;
            let e1 = [ct * cp, ct * sp, -st];
            let e2 = [-sp, cp, 0.0];
            for d in 0..3 {
                frame_ambient[(node * n) * 3 + d] = e1[d];
                frame_ambient[(node * n + 1) * 3 + d] = e2[d];
            }
        }
    }

    Ok(ManifoldModel {
        kind: ManifoldKind::RoundSphere2,
        n,
        periods: vec![],
        radius,
        resolution: vec![res_theta, res_phi],
        axes: vec![theta_axis, phi_axis],
        node_count,
        weights,
        frame_coord,
        ambient,
        ambient_dim: 3,
        frame_ambient,
        diameter: PI * radius,
    })
}

/// Round 3-sphere in Hopf coordinates (eta, xi1, xi2) with metric
/// r^2 (d eta^2 + cos^2 eta d xi1^2 + sin^2 eta d xi2^2).
///
/// Tensor components are stored in the left-invariant orthonormal frame of
/// S^3 = SU(2), so connection coefficients are constant and components are
/// global scalars: only the scalar continuation rule is needed across the
/// degenerate circles eta = 0 and eta = pi/2.
pub fn build_sphere3(radius: f64, resolution: &[usize]) -> Result<ManifoldModel> {
    if !(radius > 0.0) {
        return Err(Error::InvalidConfig(format!("non-positive radius {radius}")));
    }
    if resolution.len() != 3 {
        return Err(Error::InvalidConfig("sphere3 needs 3 resolutions".into()));
    }
    check_resolution(resolution, 8)?;
    if resolution[1] % 2 != 0 || resolution[2] % 2 != 0 {
        return Err(Error::InvalidConfig(
            "periodic-angle resolutions must be even: continuation shifts them by half a period"
                .into(),
        ));
    }
    let n = 3;
    let (ne, n1, n2) = (resolution[0], resolution[1], resolution[2]);
    let h_e = (PI / 2.0) / ne as f64;
    let h_1 = 2.0 * PI / n1 as f64;
    let h_2 = 2.0 * PI / n2 as f64;
    let eta_axis = Axis {
        len: ne,
        spacing: h_e,
        coords: (0..ne).map(|j| (j as f64 + 0.5) * h_e).collect(),
        // eta -> -eta continues through xi2 -> xi2 + pi; eta -> pi - eta
        // continues through xi1 -> xi1 + pi. Components are scalars here.
        topology: AxisTopology::Mirrored {
            low_shift: vec![(2, n2 / 2)],
            high_shift: vec![(1, n1 / 2)],
            sign_flip: false,
        },
    };
    let xi1_axis = Axis {
        len: n1,
        spacing: h_1,
        coords: (0..n1).map(|k| k as f64 * h_1).collect(),
        topology: AxisTopology::Periodic { length: 2.0 * PI },
    };
    let xi2_axis = Axis {
        len: n2,
        spacing: h_2,
        coords: (0..n2).map(|k| k as f64 * h_2).collect(),
        topology: AxisTopology::Periodic { length: 2.0 * PI },
    };
    let node_count = ne * n1 * n2;

    let mut weights = vec![0.0; node_count];
    let mut frame_coord = vec![0.0; node_count * n * n];
    let mut ambient = vec![0.0; node_count * 4];
    let mut frame_ambient = vec![0.0; node_count * n * 4];
    let r = radius;
    for j in 0..ne {
        let eta = eta_axis.coords[j];
        let s2_hi = ((j + 1) as f64 * h_e).sin().powi(2);
        let s2_lo = (j as f64 * h_e).sin().powi(2);
        let w = r.powi(3) * 0.5 * (s2_hi - s2_lo) * h_1 * h_2;
        let (se, ce) = (eta.sin(), eta.cos());
        for k1 in 0..n1 {
            let xi1 = xi1_axis.coords[k1];
            for k2 in 0..n2 {
                let xi2 = xi2_axis.coords[k2];
                let node = (j * n1 + k1) * n2 + k2;
                weights[node] = w;
                let delta = xi1 - xi2;
                let (sd, cd) = (delta.sin(), delta.cos());
                // Left-invariant frame in coordinates:
                //   e_1 = (1/r) (d_xi1 - d_xi2)
                //   e_2 = (1/r) (cosD d_eta + tan(eta) sinD d_xi1 + cot(eta) sinD d_xi2)
                //   e_3 = (1/r) (-sinD d_eta + tan(eta) cosD d_xi1 + cot(eta) cosD d_xi2)
                let f = &mut frame_coord[(node * n) * n..(node * n + 3) * n];
                f[0] = 0.0;
                f[1] = 1.0 / r;
                f[2] = -1.0 / r;
                f[3] = cd / r;
                f[4] = (se / ce) * sd / r;
                f[5] = (ce / se) * sd / r;
                f[6] = -sd / r;
                f[7] = (se / ce) * cd / r;
                f[8] = (ce / se) * cd / r;

                let (c1, s1) = (xi1.cos(), xi1.sin());
                let (c2, s2) = (xi2.cos(), xi2.sin());
                let p = [r * ce * c1, r * ce * s1, r * se * c2, r * se * s2];
                ambient[node * 4..node * 4 + 4].copy_from_slice(&p);
                // Quaternion right-multiplication fields, unit length after /r:
                // X1 = q i, X2 = q j, X3 = q k for q = (w,x,y,z).
                let (qw, qx, qy, qz) = (p[0] / r, p[1] / r, p[2] / r, p[3] / r);
                let x1 = [-qx, qw, qz, -qy];
                let x2 = [-qy, -qz, qw, qx];
                let x3 = [-qz, qy, -qx, qw];
                for d in 0..4 {
                    frame_ambient[(node * n) * 4 + d] = x1[d];
                    frame_ambient[(node * n + 1) * 4 + d] = x2[d];
                    frame_ambient[(node * n + 2) * 4 + d] = x3[d];
                }
            }
        }
    }

    Ok(ManifoldModel {
        kind: ManifoldKind::RoundSphere3,
        n,
        periods: vec![],
        radius,
        resolution: resolution.to_vec(),
        axes: vec![eta_axis, xi1_axis, xi2_axis],
        node_count,
        weights,
        frame_coord,
        ambient,
        ambient_dim: 4,
        frame_ambient,
        diameter: PI * radius,
    })
}

/// Closed-form connection and curvature for a catalog model.
pub fn curvature_data(model: &ManifoldModel) -> CurvatureData {
    let n = model.n;
    let nodes = model.node_count;
    let mut gamma = vec![0.0; nodes * n * n * n];
    let mut riem = vec![0.0; nodes * n * n * n * n];
    let mut ric = vec![0.0; nodes * n * n];
    let mut sec = vec![0.0; nodes * n * n];

    let c = match model.kind {
        ManifoldKind::FlatTorus => 0.0,
        _ => 1.0 / (model.radius * model.radius),
    };

    for node in 0..nodes {
        match model.kind {
            ManifoldKind::FlatTorus => {}
            ManifoldKind::RoundSphere2 => {
                let theta = model.node_coords(node)[0];
                let cot = theta.cos() / theta.sin();
                let r = model.radius;
                // nabla_{e_2} e_2 = -(cot/r) e_1, nabla_{e_2} e_1 = (cot/r) e_2
                gamma[((node * n + 1) * n + 1) * n] = -cot / r;
                gamma[((node * n + 1) * n) * n + 1] = cot / r;
            }
            ManifoldKind::RoundSphere3 => {
                // nabla_{e_a} e_b = (1/r) eps_{abm} e_m
                let r = model.radius;
                for a in 0..3 {
                    for b in 0..3 {
                        for m in 0..3 {
                            gamma[((node * n + a) * n + b) * n + m] = eps3(a, b, m) / r;
                        }
                    }
                }
            }
        }
        if c != 0.0 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let v = c * (kd(j, k) * kd(i, l) - kd(i, k) * kd(j, l));
                            riem[(((node * n + i) * n + j) * n + k) * n + l] = v;
                        }
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    ric[(node * n + i) * n + j] = c * (n as f64 - 1.0) * kd(i, j);
                    if i != j {
                        sec[(node * n + i) * n + j] = c;
                    }
                }
            }
        }
    }

    CurvatureData {
        n,
        node_count: nodes,
        gamma,
        riem,
        ric,
        sec,
        k_min: c,
    }
}

fn kd(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

fn eps3(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}
