// Scratch probe for calibration during development.
use blap::fields::{random_band_limited, tracefree_part, FieldRank};
use blap::manifold::{build_sphere2, build_sphere3, build_torus};
use blap::operators::{BourguignonMode, Operators};
use blap::spectral::{eigensolve, EigOptions, Subspace};
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();

    // 1. Torus dense spectrum vs lattice oracle
    let m = Arc::new(build_torus(2, &[2.0 * PI, 2.0 * PI], &[16, 16]).unwrap());
    let ops = Operators::new(&m);
    let lb = ops.bourguignon(BourguignonMode::Weitzenboeck);
    let spec = eigensolve(&ops, &lb, Subspace::Full, &EigOptions::new(40, 1e-9, 1)).unwrap();
    println!("torus clusters: {:?}", &spec.clusters[..6.min(spec.clusters.len())]);
    println!("torus kernel dim: {}", spec.kernel_dim);
    let oracle = blap::oracles::torus_spectrum(&[2.0 * PI, 2.0 * PI], 40, blap::oracles::OracleRank::Sym2);
    let flat = oracle.flat(40);
    let mut worst = 0.0f64;
    for (a, b) in spec.eigenvalues.iter().zip(&flat) {
        worst = worst.max((a - b).abs() / b.max(1.0));
    }
    println!("torus worst rel err vs oracle over 40: {worst:.3e}  [{:.1?}]", t0.elapsed());

    // 2. S2 scalar gate
    let s2 = Arc::new(build_sphere2(1.0, 32, 64).unwrap());
    let ops2 = Operators::new(&s2);
    let lap2 = ops2.function_laplacian();
    let t = Instant::now();
    let spec2 = eigensolve(&ops2, &lap2, Subspace::Full, &EigOptions::new(16, 1e-8, 2)).unwrap();
    println!("S2 scalar clusters (32x64): {:?}  solver {} [{:.1?}]", spec2.clusters, spec2.solver, t.elapsed());

    // 3. Weitzenboeck agreement defect on S2 at acceptance resolution
    let s2b = Arc::new(build_sphere2(1.0, 48, 96).unwrap());
    let ops2b = Operators::new(&s2b);
    let comp = ops2b.bourguignon(BourguignonMode::Composition);
    let weitz = ops2b.bourguignon(BourguignonMode::Weitzenboeck);
    for deg in [1usize, 2, 3] {
        let mut worst = 0.0f64;
        for seed in 0..5 {
            let phi = random_band_limited(&s2b, FieldRank::Sym2, deg, 900 + seed);
            let a = comp.apply(&phi).unwrap();
            let mut d = weitz.apply(&phi).unwrap();
            d.axpy(-1.0, &a);
            worst = worst.max(d.norm() / phi.norm());
        }
        println!("S2 48x96 comp-vs-weitz defect, ambient degree {deg}: {worst:.3e}");
    }
    // the metric alone
    let g = blap::fields::metric_field(&s2b);
    let mut d = comp.apply(&g).unwrap();
    d.axpy(-1.0, &weitz.apply(&g).unwrap());
    println!("S2 48x96 defect on g: {:.3e}", d.norm() / g.norm());

    // 4. S3 scalar gate at res 12
    let s3 = Arc::new(build_sphere3(1.0, &[12, 12, 12]).unwrap());
    let ops3 = Operators::new(&s3);
    let lap3 = ops3.function_laplacian();
    let t = Instant::now();
    let spec3 = eigensolve(&ops3, &lap3, Subspace::Full, &EigOptions::new(14, 1e-8, 3)).unwrap();
    println!("S3 scalar clusters (12^3): {:?} solver {} [{:.1?}]", spec3.clusters, spec3.solver, t.elapsed());

    // S3 comp-vs-weitz defect
    let comp3 = ops3.bourguignon(BourguignonMode::Composition);
    let weitz3 = ops3.bourguignon(BourguignonMode::Weitzenboeck);
    let mut worst3 = 0.0f64;
    for seed in 0..5 {
        let phi = random_band_limited(&s3, FieldRank::Sym2, 2, 900 + seed);
        let a = comp3.apply(&phi).unwrap();
        let mut d = weitz3.apply(&phi).unwrap();
        d.axpy(-1.0, &a);
        worst3 = worst3.max(d.norm() / phi.norm());
    }
    println!("S3 12^3 comp-vs-weitz defect deg2: {worst3:.3e}");

    // 5. S3 TT spectrum at res 12
    let t = Instant::now();
    let lb3 = ops3.bourguignon(BourguignonMode::Weitzenboeck);
    let mut opts = EigOptions::new(12, 1e-8, 4);
    opts.cg_tol = 1e-10;
    match eigensolve(&ops3, &lb3, Subspace::Tt, &opts) {
        Ok(tt) => {
            println!(
                "S3 TT (12^3): clusters {:?} probe {:?} div-resid {:?} matvecs {} [{:.1?}]",
                tt.clusters, tt.tt_probe, tt.tt_constraint_residual, tt.matvecs, t.elapsed()
            );
        }
        Err(e) => println!("S3 TT failed: {e}"),
    }

    // 6. S2 TT negative control
    let t = Instant::now();
    let lb2 = ops2b.bourguignon(BourguignonMode::Weitzenboeck);
    let mut opts = EigOptions::new(4, 1e-8, 5);
    opts.cg_tol = 1e-10;
    match eigensolve(&ops2b, &lb2, Subspace::Tt, &opts) {
        Ok(tt) => println!(
            "S2 TT: trivial={} probe {:?} evals {:?} [{:.1?}]",
            tt.tt_trivial, tt.tt_probe, tt.eigenvalues, t.elapsed()
        ),
        Err(e) => println!("S2 TT failed: {e}"),
    }

    // 7. harmonic residual of the kernel vector on spheres
    for (name, model) in [("S2 48x96", s2b.clone()), ("S3 12^3", s3.clone())] {
        let o = Operators::new(&model);
        let g = blap::fields::metric_field(&model);
        let (cd, hd) = blap::operators::harmonic_residual(&o, &g).unwrap();
        println!("{name}: metric residuals codazzi {cd:.3e} delta {hd:.3e}");
    }

    // 8. S2 traceless low spectrum (bounds sanity)
    let t = Instant::now();
    let lbs = ops2.bourguignon(BourguignonMode::Weitzenboeck);
    let tl = eigensolve(&ops2, &lbs, Subspace::Traceless, &EigOptions::new(8, 1e-8, 6)).unwrap();
    println!("S2 traceless clusters: {:?} solver {} [{:.1?}]", tl.clusters, tl.solver, t.elapsed());
    let tr = eigensolve(&ops2, &lbs, Subspace::TracePart, &EigOptions::new(8, 1e-8, 7)).unwrap();
    println!("S2 trace-part clusters: {:?}", tr.clusters);

    // 9. torus tracefree property check (orthogonality battery)
    let tf = tracefree_part(&random_band_limited(&m, FieldRank::Sym2, 2, 1)).unwrap();
    println!("tracefree norm sample: {:.3}", tf.norm());
    println!("total {:.1?}", t0.elapsed());
}
