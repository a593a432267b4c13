//! Runs the signature search for one (d, N) and prints a summary.
//!
//! ```text
//! cargo run --release -p etf-core --example solve_etf -- 6 16 [seeds] [real]
//! ```

use std::time::Instant;

use etf_core::solver::{solve_signature, SolverConfig};
use etf_core::{gram_from_signature, spec_from_dn, verify_etf};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let d: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(2);
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let seeds: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let real_mode = args.get(3).is_some_and(|s| s == "real");
    let spec = spec_from_dn::<f64>(d, n, real_mode).expect("valid (d, N)");
    let config = SolverConfig { seeds, real_mode, ..SolverConfig::default() };
    let start = Instant::now();
    let result = solve_signature(&spec, &config).expect("valid config");
    println!(
        "ETF({d},{n}) {:?} seed={:?} iters={} polished={} best={:.3e} tally={:?} in {:.2?}",
        result.status,
        result.winning_seed_index,
        result.iterations,
        result.polished,
        result.best_residual,
        result.tally,
        start.elapsed()
    );
    if let Some(u) = &result.signature {
        let report = verify_etf(&gram_from_signature(u, d).expect("signature matches d"), 1e-8);
        println!("verify_etf pass={} coherence={:.12}", report.pass, report.coherence());
    }
}
