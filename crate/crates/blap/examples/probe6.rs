use blap::manifold::{build_sphere2, build_sphere3};
use blap::operators::{BourguignonMode, Operators};
use blap::spectral::{eigensolve, EigOptions, Subspace};
use std::sync::Arc;
use std::time::Instant;

fn main() {
    // S2 traceless lowest eigenvalue of Lap_B across resolutions
    eprintln!("== S2 traceless lowest (Lap_B):");
    let mut vals = vec![];
    for nt in [16usize, 24, 32] {
        let t = Instant::now();
        let m = Arc::new(build_sphere2(1.0, nt, 2 * nt).unwrap());
        let ops = Operators::new(&m);
        let lb = ops.bourguignon(BourguignonMode::Weitzenboeck);
        let spec = eigensolve(&ops, &lb, Subspace::Traceless, &EigOptions::new(4, 1e-9, 1)).unwrap();
        eprintln!("  res {nt}: evals {:?}  [{:.1?}]", &spec.eigenvalues[..4], t.elapsed());
        vals.push(spec.eigenvalues[0]);
    }
    // Richardson-style order estimate assuming e = C h^p with h ~ 1/nt:
    // p = log((v0 - v1)/(v1 - v2)) / log(ratio)
    let d01 = vals[0] - vals[1];
    let d12 = vals[1] - vals[2];
    eprintln!("  diffs {d01:.3e} {d12:.3e}  order≈ {:.2}", (d01 / d12).abs().ln() / (24f64 / 16.0).ln());

    eprintln!("== S3 TT lowest (Lap_B):");
    let mut tvals = vec![];
    for ne in [8usize, 10, 12, 14] {
        let t = Instant::now();
        let m = Arc::new(build_sphere3(1.0, &[ne, ne.max(8) / 2 * 2, ne / 2 * 2]).unwrap());
        let ops = Operators::new(&m);
        let lb = ops.bourguignon(BourguignonMode::Weitzenboeck);
        let mut opts = EigOptions::new(2, 1e-8, 2);
        opts.cg_tol = 1e-10;
        match eigensolve(&ops, &lb, Subspace::Tt, &opts) {
            Ok(spec) => {
                eprintln!(
                    "  res {ne}: evals {:?} probe {:?} matvecs {} [{:.1?}]",
                    spec.eigenvalues, spec.tt_probe, spec.matvecs, t.elapsed()
                );
                if !spec.eigenvalues.is_empty() {
                    tvals.push((ne, spec.eigenvalues[0]));
                }
            }
            Err(e) => eprintln!("  res {ne}: FAILED {e}"),
        }
    }
    for w in tvals.windows(2) {
        let (n0, v0) = w[0];
        let (n1, v1) = w[1];
        eprintln!("  err@{n0} = {:.4e}, err@{n1} = {:.4e}, order≈ {:.2}",
            v0 - 9.0, v1 - 9.0, ((v0 - 9.0).abs() / (v1 - 9.0).abs()).ln() / (n1 as f64 / n0 as f64).ln());
    }
}
