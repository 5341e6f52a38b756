use blap::manifold::build_sphere2;
use blap::operators::derivatives::axis_derivative;
use std::sync::Arc;

fn main() {
    let nt = 16usize;
    let np = 8usize;
    let m = Arc::new(build_sphere2(1.0, nt, np).unwrap());
    // u = sin(theta) on every phi line
    let u: Vec<f64> = (0..m.node_count)
        .map(|i| m.node_coords(i)[0].sin())
        .collect();
    for parity in [1.0f64, -1.0] {
        let d = axis_derivative(&m, 0, parity);
        let dt = d.transpose();
        let fwd = d.matvec(&u);
        let tr = dt.matvec(&u);
        eprintln!("== parity {parity}");
        for j in 0..nt {
            let node = j * np;
            let th = m.node_coords(node)[0];
            eprintln!(
                "theta {th:.3}: D u = {:+.4e} (cos {:+.4e})   D^T u = {:+.4e} (-cos {:+.4e})",
                fwd[node],
                th.cos(),
                tr[node],
                -th.cos()
            );
        }
    }
}
