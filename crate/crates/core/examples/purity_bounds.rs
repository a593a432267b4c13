//! Average reduced purity of the ETF(6,16) family under a 2×3 split: values
//! at two reference parameter vectors for every factorisation and index
//! order, then a multi-start search for the extremes.
//!
//! ```text
//! cargo run --release -p etf-core --example purity_bounds -- [restarts]
//! ```

use etf_core::entangle::{
    average_purity_with, optimize_average_purity, Bipartition, Factorization, FrameFamily, IndexOrder, Mode,
    OptimizerConfig, SignatureFamily,
};

const ALPHA_LOW: [f64; 6] = [0.0970, 0.0957, 0.4536, 0.7275, 0.7287, 0.2258];
const ALPHA_HIGH: [f64; 6] = [2.2222, 2.2233, 3.1401, 0.4173, 2.9043, 2.6317];

fn main() {
    let restarts: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let bp = Bipartition::new(2, 3).unwrap();
    for factorization in [Factorization::Eigen, Factorization::Cholesky] {
        let family = SignatureFamily::u16(factorization);
        for order in [IndexOrder::AMajor, IndexOrder::BMajor] {
            let low = average_purity_with(&family.frame(&ALPHA_LOW).unwrap(), bp, order).unwrap().average;
            let high = average_purity_with(&family.frame(&ALPHA_HIGH).unwrap(), bp, order).unwrap().average;
            println!("{factorization:?} {order:?}: low point {low:.6}, high point {high:.6}");
        }
    }
    for factorization in [Factorization::Eigen, Factorization::Cholesky] {
        let family = SignatureFamily::u16(factorization);
        for order in [IndexOrder::AMajor, IndexOrder::BMajor] {
            let config = OptimizerConfig { restarts, order, ..OptimizerConfig::default() };
            let min = optimize_average_purity(&family, bp, Mode::Min, &config).unwrap();
            let max = optimize_average_purity(&family, bp, Mode::Max, &config).unwrap();
            println!(
                "{factorization:?} {order:?}: min {:.6} at {:?}, max {:.6} at {:?}",
                min.value, min.params, max.value, max.params
            );
        }
    }
}
