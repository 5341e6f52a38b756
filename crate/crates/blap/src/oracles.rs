//! Closed-form reference spectra and pointwise curvature actions.
//!
//! Everything here is independent of the operator assembly: torus spectra by
//! Fourier lattice enumeration, sphere spectra from the classical formulas,
//! curvature actions from the constant-curvature closed forms. Integer
//! arithmetic is used wherever possible.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleSource {
    TorusFourier,
    SphereTt,
    SphereLichTt,
    SphereScalar,
    ConstantCurvaturePointwise,
}

impl OracleSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            OracleSource::TorusFourier => "torus-fourier",
            OracleSource::SphereTt => "sphere-tt",
            OracleSource::SphereLichTt => "sphere-lich-tt",
            OracleSource::SphereScalar => "sphere-scalar",
            OracleSource::ConstantCurvaturePointwise => "constant-curvature-pointwise",
        }
    }
}

/// Reference spectrum: ascending eigenvalues with multiplicities where known.
#[derive(Debug, Clone)]
pub struct OracleSpectrum {
    pub source: OracleSource,
    pub eigenvalues: Vec<f64>,
    /// Multiplicity per distinct eigenvalue; `None` where the reference does
    /// not determine them (sphere TT spectra).
    pub multiplicities: Option<Vec<usize>>,
}

impl OracleSpectrum {
    /// Expand to a flat ascending list counting multiplicity, `count` entries.
    pub fn flat(&self, count: usize) -> Vec<f64> {
        let mut out = Vec::new();
        match &self.multiplicities {
            Some(mults) => {
                for (ev, m) in self.eigenvalues.iter().zip(mults) {
                    for _ in 0..*m {
                        out.push(*ev);
                        if out.len() == count {
                            return out;
                        }
                    }
                }
            }
            None => {
                for ev in &self.eigenvalues {
                    out.push(*ev);
                    if out.len() == count {
                        return out;
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleRank {
    Scalar,
    Sym2,
}

/// Flat-torus spectrum by brute-force Fourier lattice enumeration:
/// eigenvalue sum_i (2 pi k_i / L_i)^2 with multiplicity = lattice count
/// times the component dimension (1 or n(n+1)/2).
pub fn torus_spectrum(periods: &[f64], count: usize, rank: OracleRank) -> OracleSpectrum {
    let n = periods.len();
    let comp_dim = match rank {
        OracleRank::Scalar => 1,
        OracleRank::Sym2 => n * (n + 1) / 2,
    };
    // enumerate lattice shells until we certainly have `count` entries
    let mut kmax = 2i64;
    loop {
        let mut evs: Vec<(f64, usize)> = Vec::new();
        let mut stack = vec![vec![]];
        for a in 0..n {
            let mut next = Vec::new();
            for pre in &stack {
                for k in -kmax..=kmax {
                    let mut e: Vec<i64> = pre.clone();
                    e.push(k);
                    let _ = a;
                    next.push(e);
                }
            }
            stack = next;
        }
        let mut values: Vec<f64> = stack
            .iter()
            .map(|k| {
                k.iter()
                    .zip(periods)
                    .map(|(ki, l)| {
                        let w = 2.0 * std::f64::consts::PI * *ki as f64 / l;
                        w * w
                    })
                    .sum()
            })
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // cluster identical lattice values (exact for equal periods, and
        // within 1e-12 relative otherwise)
        for v in values {
            match evs.last_mut() {
                Some((ev, m)) if (v - *ev).abs() <= 1e-12 * ev.max(1.0) => *m += 1,
                _ => evs.push((v, 1)),
            }
        }
        // the enumeration is complete below the boundary shell
        let complete_below = {
            let min_l = periods.iter().cloned().fold(f64::INFINITY, f64::min);
            let w = 2.0 * std::f64::consts::PI * kmax as f64 / min_l;
            w * w
        };
        let usable: Vec<(f64, usize)> = evs.into_iter().filter(|(v, _)| *v < complete_below).collect();
        let total: usize = usable.iter().map(|(_, m)| m * comp_dim).sum();
        if total >= count {
            let mut eigenvalues = Vec::new();
            let mut mults = Vec::new();
            for (v, m) in usable {
                eigenvalues.push(v);
                mults.push(m * comp_dim);
            }
            return OracleSpectrum {
                source: OracleSource::TorusFourier,
                eigenvalues,
                multiplicities: Some(mults),
            };
        }
        kmax += 2;
    }
}

/// Bourguignon TT spectrum on the unit n-sphere:
/// lambda_a = a (n - 1 + a) + (n - 2), a >= 2. Multiplicities unknown here.
pub fn sphere_tt(n: usize, a_max: usize) -> Result<OracleSpectrum> {
    if n < 2 || a_max < 2 {
        return Err(Error::InvalidInput("need n >= 2 and a_max >= 2".into()));
    }
    let eigenvalues = (2..=a_max)
        .map(|a| (a * (n - 1 + a) + (n - 2)) as f64)
        .collect();
    Ok(OracleSpectrum {
        source: OracleSource::SphereTt,
        eigenvalues,
        multiplicities: None,
    })
}

/// Lichnerowicz TT spectrum on the unit n-sphere:
/// mu_a = a (n - 1 + a) + 2 (n - 1), a >= 2.
pub fn sphere_lich_tt(n: usize, a_max: usize) -> Result<OracleSpectrum> {
    if n < 2 || a_max < 2 {
        return Err(Error::InvalidInput("need n >= 2 and a_max >= 2".into()));
    }
    let eigenvalues = (2..=a_max)
        .map(|a| (a * (n - 1 + a) + 2 * (n - 1)) as f64)
        .collect();
    Ok(OracleSpectrum {
        source: OracleSource::SphereLichTt,
        eigenvalues,
        multiplicities: None,
    })
}

/// Scalar Laplacian spectrum on the radius-r n-sphere:
/// l (l + n - 1) / r^2 with multiplicity (2l + n - 1) (l + n - 2)! / (l! (n-1)!).
pub fn sphere_scalar(n: usize, l_max: usize, radius: f64) -> Result<OracleSpectrum> {
    if n < 2 {
        return Err(Error::InvalidInput("need n >= 2".into()));
    }
    let r2 = radius * radius;
    let mut eigenvalues = Vec::new();
    let mut mults = Vec::new();
    for l in 0..=l_max {
        eigenvalues.push((l * (l + n - 1)) as f64 / r2);
        let num: u128 = (2 * l + n - 1) as u128 * factorial(l + n - 2);
        let den: u128 = factorial(l) * factorial(n - 1);
        mults.push((num / den) as usize);
    }
    Ok(OracleSpectrum {
        source: OracleSource::SphereScalar,
        eigenvalues,
        multiplicities: Some(mults),
    })
}

fn factorial(k: usize) -> u128 {
    (1..=k as u128).product::<u128>().max(1)
}

/// Pointwise curvature actions on constant-curvature space, sym2 components
/// in the (i <= j) order: returns (B phi, K phi, Ro phi) where
/// Ro phi = c ((tr phi) g - phi), B phi = c (n phi - (tr phi) g),
/// K phi = 2c (n phi - (tr phi) g).
pub fn constant_curvature_pointwise(
    n: usize,
    c: f64,
    phi: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let pairs = crate::fields::sym_pairs(n);
    assert_eq!(phi.len(), pairs.len());
    let tr: f64 = (0..n).map(|i| phi[crate::fields::sym_index(n, i, i)]).sum();
    let mut b = vec![0.0; phi.len()];
    let mut k = vec![0.0; phi.len()];
    let mut ro = vec![0.0; phi.len()];
    for (idx, &(i, j)) in pairs.iter().enumerate() {
        let g = if i == j { 1.0 } else { 0.0 };
        ro[idx] = c * (tr * g - phi[idx]);
        b[idx] = c * (n as f64 * phi[idx] - tr * g);
        k[idx] = 2.0 * b[idx];
    }
    (b, k, ro)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn torus_sym2_shells() {
        let o = torus_spectrum(&[2.0 * PI, 2.0 * PI], 40, OracleRank::Sym2);
        let m = o.multiplicities.as_ref().unwrap();
        assert_eq!(o.eigenvalues[0], 0.0);
        assert_eq!(m[0], 3);
        assert_eq!(o.eigenvalues[1], 1.0);
        assert_eq!(m[1], 12);
        assert_eq!(o.eigenvalues[2], 2.0);
        assert_eq!(m[2], 12);
        assert_eq!(o.eigenvalues[3], 4.0);
        assert_eq!(m[3], 12);
        assert_eq!(o.eigenvalues[4], 5.0);
        assert_eq!(m[4], 24);
    }

    #[test]
    fn torus_scalar_shells() {
        let o = torus_spectrum(&[2.0 * PI, 2.0 * PI], 10, OracleRank::Scalar);
        let m = o.multiplicities.as_ref().unwrap();
        assert_eq!(&o.eigenvalues[..3], &[0.0, 1.0, 2.0]);
        assert_eq!(&m[..3], &[1, 4, 4]);
        let o1 = torus_spectrum(&[1.0, 1.0], 5, OracleRank::Scalar);
        assert!((o1.eigenvalues[1] - 4.0 * PI * PI).abs() < 1e-9);
    }

    #[test]
    fn sphere_tt_values() {
        let o = sphere_tt(3, 3).unwrap();
        assert_eq!(o.eigenvalues, vec![9.0, 16.0]);
        let o2 = sphere_tt(2, 2).unwrap();
        assert_eq!(o2.eigenvalues, vec![6.0]); // vacuous: the TT space on S^2 is empty
        let o4 = sphere_tt(4, 2).unwrap();
        assert_eq!(o4.eigenvalues, vec![12.0]);
        assert!(sphere_tt(1, 2).is_err());
    }

    #[test]
    fn sphere_lich_tt_values_and_consistency() {
        let o = sphere_lich_tt(3, 3).unwrap();
        assert_eq!(o.eigenvalues, vec![12.0, 19.0]);
        // mu_a - n = lambda_a for every n and a
        for n in 2..=5 {
            let tt = sphere_tt(n, 6).unwrap();
            let li = sphere_lich_tt(n, 6).unwrap();
            for (l, m) in tt.eigenvalues.iter().zip(&li.eigenvalues) {
                assert_eq!(m - n as f64, *l);
            }
        }
    }

    #[test]
    fn sphere_scalar_values() {
        let o = sphere_scalar(2, 3, 1.0).unwrap();
        assert_eq!(o.eigenvalues, vec![0.0, 2.0, 6.0, 12.0]);
        assert_eq!(o.multiplicities.unwrap(), vec![1, 3, 5, 7]);
        let o3 = sphere_scalar(3, 2, 1.0).unwrap();
        assert_eq!(o3.eigenvalues, vec![0.0, 3.0, 8.0]);
        assert_eq!(o3.multiplicities.unwrap(), vec![1, 4, 9]);
        let or = sphere_scalar(2, 1, 2.0).unwrap();
        assert_eq!(or.eigenvalues[1], 0.5);
    }

    #[test]
    fn pointwise_closed_forms() {
        // c=1, n=2, phi = g: everything vanishes
        let (b, k, _) = constant_curvature_pointwise(2, 1.0, &[1.0, 0.0, 1.0]);
        assert!(b.iter().all(|v| v.abs() < 1e-15));
        assert!(k.iter().all(|v| v.abs() < 1e-15));
        // c=1, n=3, traceless: B = 3 phi, K = 6 phi
        let phi = [1.0, 0.5, -0.25, -2.0, 0.1, 1.0];
        let (b, k, _) = constant_curvature_pointwise(3, 1.0, &phi);
        for i in 0..6 {
            assert!((b[i] - 3.0 * phi[i]).abs() < 1e-15);
            assert!((k[i] - 6.0 * phi[i]).abs() < 1e-15);
        }
        // c=0: all zero maps
        let (b, k, r) = constant_curvature_pointwise(3, 0.0, &phi);
        assert!(b.iter().chain(&k).chain(&r).all(|v| *v == 0.0));
    }
}
