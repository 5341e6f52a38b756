use blap::manifold::build_torus;
use blap::operators::{BourguignonMode, Operators};
use blap::spectral::{eigensolve, EigOptions, Subspace};
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let t = Instant::now();
    let m = Arc::new(build_torus(2, &[2.0 * PI, 2.0 * PI], &[16, 16]).unwrap());
    eprintln!("built torus {:?}", t.elapsed());
    let ops = Operators::new(&m);
    eprintln!("ops {:?}", t.elapsed());
    let lb = ops.bourguignon(BourguignonMode::Weitzenboeck);
    eprintln!("lb {:?}", t.elapsed());
    let phi = blap::fields::random_raw(&m, blap::fields::FieldRank::Sym2, 1);
    let out = lb.apply(&phi).unwrap();
    eprintln!("one apply {:?} norm {}", t.elapsed(), out.norm());
    let d = lb.self_adjointness_defect(2, 1);
    eprintln!("selfadj {d:.2e} {:?}", t.elapsed());
    let spec = eigensolve(&ops, &lb, Subspace::Full, &EigOptions::new(10, 1e-9, 1)).unwrap();
    eprintln!("dense eig {:?} first {:?}", t.elapsed(), &spec.eigenvalues[..4]);
}
