use blap::manifold::build_sphere2;
use blap::operators::Operators;
use blap::spectral::{eigensolve, EigOptions, Subspace};
use std::sync::Arc;

fn main() {
    let nt = 16usize;
    let np = 32usize;
    let m = Arc::new(build_sphere2(1.0, nt, np).unwrap());
    let ops = Operators::new(&m);
    let lap = ops.function_laplacian();
    let spec = eigensolve(&ops, &lap, Subspace::Full, &EigOptions::new(12, 1e-9, 1)).unwrap();
    eprintln!("clusters: {:?}", spec.clusters);
    for (i, ev) in spec.eigenvalues.iter().enumerate() {
        if *ev > 1e-6 && (*ev - 2.0).abs() > 0.5 && *ev < 5.9 {
            eprintln!("suspicious eigenvalue {ev}");
            let f = &spec.eigenfields[i];
            // phi-mode energy per theta row
            for j in 0..nt {
                let mut row: Vec<f64> = (0..np).map(|k| f.get(j * np + k, 0)).collect();
                // DFT magnitude at low modes
                let mut mags = vec![];
                for mode in 0..6 {
                    let mut re = 0.0;
                    let mut im = 0.0;
                    for (k, v) in row.iter().enumerate() {
                        let ph = 2.0 * std::f64::consts::PI * (mode * k) as f64 / np as f64;
                        re += v * ph.cos();
                        im += v * ph.sin();
                    }
                    mags.push(((re * re + im * im).sqrt() * 1000.0).round() / 1000.0);
                }
                // Nyquist mode
                let mut nyq = 0.0;
                for (k, v) in row.iter().enumerate() {
                    nyq += v * if k % 2 == 0 { 1.0 } else { -1.0 };
                }
                let amp = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                eprintln!(
                    "theta row {j:2}: amp {amp:8.4} modes {mags:?} nyquist {:8.3}",
                    nyq
                );
                row.clear();
            }
            break;
        }
    }
}
