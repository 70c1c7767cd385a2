use bakerlab::walsh::{WalshEigen, WalshParams};

fn main() {
    for k in [6usize, 8, 10, 12, 14] {
        let p = WalshParams::new(2, k, k / 2).unwrap();
        let eigen = WalshEigen::new(p).unwrap();
        let order = p.order() as f64;
        let dim = p.dim() as f64;
        let dev = eigen
            .traces
            .iter()
            .map(|t| (t * order / dim - 1.0).abs())
            .fold(0.0f64, f64::max);
        let uniform = dim / order;
        println!(
            "k={k}: dim/order = {uniform:.3}, max dev = {dev:.6e}, ranks[0..4] = {:?}",
            &eigen.ranks[..4.min(eigen.ranks.len())]
        );
    }
}
