use blap::fields::metric_field;
use blap::manifold::build_sphere2;
use blap::operators::Operators;
use std::sync::Arc;

fn main() {
    let nt = 16usize;
    let np = 16usize;
    let m = Arc::new(build_sphere2(1.0, nt, np).unwrap());
    let ops = Operators::new(&m);
    let delta0 = ops.divergence_codifferential();
    let g = metric_field(&m);
    let out = delta0.apply(&g).unwrap();
    eprintln!("|delta0 g| / |g| = {:.3e}", out.norm() / g.norm());
    for j in 0..nt {
        let node = j * np + 3;
        let theta = m.node_coords(node)[0];
        eprintln!(
            "theta {theta:.3}: (delta0 g)_1 = {:+.6e}  (delta0 g)_2 = {:+.6e}",
            out.get(node, 0),
            out.get(node, 1)
        );
    }
    // also the direct divergence of g (should be ~0)
    let div = ops.divergence();
    let dg = div.apply(&g).unwrap();
    eprintln!("|div g| / |g| = {:.3e}", dg.norm() / g.norm());

    // and the sym gradient on a sample one-form to compare adjoint consistency:
    // <g, sym_grad(alpha)> should equal <delta0 g, alpha>
    let alpha = blap::fields::random_raw(&m, blap::fields::FieldRank::OneForm, 5);
    let d0 = ops.sym_gradient();
    let lhs = blap::fields::inner_product_global(&g, &d0.apply(&alpha).unwrap()).unwrap();
    let rhs = blap::fields::inner_product_global(&out, &alpha).unwrap();
    eprintln!("adjoint pairing: {lhs:.6e} vs {rhs:.6e}");
}
