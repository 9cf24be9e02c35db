use riesz_core::bump::*;

fn main() {
    let lam = 0.5;
    let bump = build_phi0(lam, 3).unwrap();
    let psi = build_psi(&bump);
    // discrete transform identity Ψ̂(v) = 2Φ̂(2v) − Φ̂(v)
    for v in [0.5f64, 3.0, 10.0, 40.0, 200.0] {
        let lhs = psi.psi.transform_deriv_exact(0, v).re;
        let rhs = 2.0 * bump.phi0.transform_deriv_exact(0, 2.0 * v).re - bump.phi0.transform_deriv_exact(0, v).re;
        println!("v={v:7.1}: Ψ̂ {lhs:+.6e}  2Φ̂(2v)−Φ̂(v) {rhs:+.6e}  diff {:.2e}", (lhs - rhs).abs());
    }
    let b = riesz_core::multiplier::LayerBuilder::new(riesz_core::multiplier::RieszSymbol::new(1.0, lam, 1.0), &bump, &psi).unwrap();
    let mut worst = (0.0f64, 0.0f64);
    for k in 0..=400 {
        let rho = 0.5 + 1.5 * k as f64 / 400.0;
        let sum: f64 = (0..=4u32).map(|l| b.eval_layer(l, rho)).sum();
        let window = b.eval_window_sum(4, rho);
        let d = (sum - window).abs();
        if d > worst.1 { worst = (rho, d); }
    }
    println!("telescope L=4 worst at rho={} diff {:.3e}", worst.0, worst.1);
    let rho = worst.0;
    for l in 0..=4u32 {
        println!("  layer {l} at worst-rho: {:+.6e}", b.eval_layer(l, rho));
    }
    println!("  window4 {:+.6e} window0 {:+.6e}", b.eval_window_sum(4, rho), b.eval_window_sum(0, rho));
}
