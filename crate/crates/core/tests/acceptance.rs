//! Acceptance criteria. Each test writes one `criterion N: PASS|FAIL` line to
//! stdout (bypassing the harness capture) and then asserts.

mod support;

use std::io::Write;
use std::time::Instant;

use rand::Rng;

use etf_core::construct::{
    certify_inequivalent, enumerate_fourier_tensors, exact_sqrt, real_hadamard_power,
    real_hadamard_tensor, Equivalence,
};
use etf_core::entangle::{
    average_purity, average_purity_with, optimize_average_purity, sic_average_purity, signature_frame, Bipartition,
    Factorization, FrameFamily, IndexOrder, Mode, OptimizerConfig, SignatureFamily,
};
use etf_core::families::{find_er_pairs, inject_parameter, u16_family, u16_parametric, validate_family, ParametricFamily};
use etf_core::roots::{roots_compatible_etfs, sic_root_candidates};
use etf_core::solver::{scan, seed_rng, solve_signature, SolverConfig, SolverStatus};
use etf_core::{fickus_check, gram_from_signature, spec_from_dn, verify_etf, verify_signature, ComplexMatrix64};

fn report(criterion: &str, pass: bool, detail: &str) {
    let line = format!("criterion {criterion}: {} | {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn config(seeds: usize) -> SolverConfig {
    SolverConfig { seeds, ..SolverConfig::default() }
}

#[test]
fn criterion_01_solver_reproduces_known_etfs() {
    let start = Instant::now();
    let mut pass = true;
    let mut notes = Vec::new();
    for (d, n) in [(1, 3), (2, 4), (3, 7), (3, 9), (6, 16)] {
        let spec = spec_from_dn::<f64>(d, n, false).unwrap();
        let result = solve_signature(&spec, &config(1000)).unwrap();
        let verified = result.signature.as_ref().is_some_and(|u| verify_signature(u, 1e-8).1.pass);
        let ok = result.status == SolverStatus::Converged && verified;
        pass &= ok;
        notes.push(format!(
            "({d},{n}) {} seed {:?} iters {}",
            if ok { "ok" } else { "missed" },
            result.winning_seed_index,
            result.iterations
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 300.0;
    report("1", pass, &format!("{}; {elapsed:.1} s", notes.join(", ")));
}

fn negative_control(d: usize, n: usize, config: &SolverConfig) -> (bool, String) {
    let spec = spec_from_dn::<f64>(d, n, false).unwrap();
    let result = solve_signature(&spec, config).unwrap();
    // a convergence here would have to be a false positive
    let bogus = result.signature.as_ref().is_some_and(|u| verify_signature(u, 1e-8).1.pass);
    let ok = result.tally.converged == 0 && result.status == SolverStatus::Exhausted && !bogus;
    let detail = format!(
        "({d},{n}) {} seeds x {} iters: converged {}, oscillating {}, max-iters {}, rank-deficient {}, rejected {}, best residual {:.3e}",
        result.seeds_used,
        config.max_iters,
        result.tally.converged,
        result.tally.oscillating,
        result.tally.max_iterations,
        result.tally.rank_deficient,
        result.tally.rejected,
        result.best_residual
    );
    (ok, detail)
}

#[test]
fn criterion_02_negative_controls() {
    let (ok_small, small) = negative_control(2, 5, &config(1000));
    // 10^4 seeds at the full 10^4-iteration budget take over an hour; the
    // default run caps each seed at 10^3 cycles (see the ignored test below)
    let capped = SolverConfig { max_iters: 1000, ..config(10_000) };
    let (ok_large, large) = negative_control(11, 22, &capped);
    report("2", ok_small && ok_large, &format!("{small}; {large}"));
}

#[test]
#[ignore = "slow: 10^4 seeds at 10^4 iterations for ETF(11, 22), about an hour"]
fn criterion_02_negative_control_full_budget() {
    let (ok, detail) = negative_control(11, 22, &config(10_000));
    report("2 (full budget)", ok, &detail);
}

#[test]
#[ignore = "slow: up to 10^4 seeds for ETF(10, 20)"]
fn criterion_03_ten_twenty_within_ten_thousand_seeds() {
    let spec = spec_from_dn::<f64>(10, 20, false).unwrap();
    let result = solve_signature(&spec, &config(10_000)).unwrap();
    let verified = result.signature.as_ref().is_some_and(|u| verify_signature(u, 1e-8).1.pass);
    report(
        "3",
        result.status == SolverStatus::Converged && verified,
        &format!("seed {:?} after {} seeds, best residual {:.3e}", result.winning_seed_index, result.seeds_used, result.best_residual),
    );
}

#[test]
fn criterion_04_fourier_tensor_enumeration() {
    let mut pass = true;
    let mut notes = Vec::new();
    for (n, expected) in [(16u64, 2usize), (64, 3), (36, 1)] {
        let start = Instant::now();
        let list = enumerate_fourier_tensors::<f64>(n).unwrap();
        let root = exact_sqrt(n).unwrap();
        let d = ((n - root) / 2) as usize;
        let all_verified = list.iter().all(|t| {
            let g = gram_from_signature(&t.signature, d).unwrap();
            verify_etf(&g, 1e-8).pass
        });
        let mut inequivalent = true;
        for i in 0..list.len() {
            for j in i + 1..list.len() {
                inequivalent &= certify_inequivalent(list[i].signature.matrix(), list[j].signature.matrix()).unwrap()
                    == Equivalence::Inequivalent;
            }
        }
        let ok = list.len() == expected && all_verified && inequivalent;
        pass &= ok;
        let labels: Vec<String> = list.iter().map(|t| t.label()).collect();
        notes.push(format!(
            "N={n}: {} constructions [{}] d={d} verified={all_verified} pairwise inequivalent={inequivalent} ({:.1} s)",
            list.len(),
            labels.join(", "),
            start.elapsed().as_secs_f64()
        ));
    }
    report("4", pass, &notes.join("; "));
}

#[test]
fn criterion_05_roots_regressions() {
    let hoggar: Vec<u64> = roots_compatible_etfs(64, 4).unwrap().iter().map(|r| r.d).collect();
    let sic = sic_root_candidates(100);
    let pass = hoggar == [8, 28, 32] && sic == [2, 3, 8, 15, 24, 35, 48, 63, 80, 99];
    report("5", pass, &format!("roots_compatible_etfs(64, 4) = {hoggar:?}; sic_root_candidates(100) = {sic:?}"));
}

#[test]
fn criterion_06_u16_family() {
    let family = u16_parametric::<f64>();
    let summary = validate_family(&family, 100, 6, 1e-8);

    let mut rng = seed_rng(6, 1);
    let mut spectrum_ok = true;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let alphas: [f64; 6] = std::array::from_fn(|_| rng.random_range(0.0..std::f64::consts::TAU));
        let u = u16_family(&alphas);
        let report = verify_etf(&gram_from_signature(&u, 6).unwrap(), 1e-8);
        let clusters: Vec<(usize, f64)> = report.eigenvalue_clusters.iter().map(|c| (c.multiplicity, c.value)).collect();
        let shape = clusters.len() == 2
            && clusters.iter().any(|&(m, v)| m == 6 && (v - 8.0 / 3.0).abs() < 1e-8)
            && clusters.iter().any(|&(m, v)| m == 10 && v.abs() < 1e-8);
        worst = worst.max(report.max_spectral_deviation);
        spectrum_ok &= shape && report.pass;
    }

    let zero = u16_family(&[0.0; 6]);
    let tensor = real_hadamard_tensor::<f64>(4).unwrap();
    let zero_err = zero.matrix().max_abs_diff(tensor.matrix());
    // the constant-diagonal form is Hadamard-equivalent to the plain power H2^{⊗4}/4
    let plain = real_hadamard_power::<f64>(4);
    let same_class = certify_inequivalent(zero.matrix(), &plain).unwrap() == Equivalence::Inconclusive;

    let pass = summary.pass && spectrum_ok && zero_err < 1e-12 && same_class;
    report(
        "6",
        pass,
        &format!(
            "validate_family pass={} (failed {}/{}), spectrum {{0 x10, 8/3 x6}} ok={spectrum_ok} worst {worst:.2e}, |U(0) - H2^4/4| = {zero_err:.1e}, Haagerup match with H2^4/4 = {same_class}",
            summary.pass, summary.failed_samples, summary.samples
        ),
    );
}

#[test]
fn criterion_07_hermitian_injection_on_four_by_four_is_degenerate() {
    let h = ComplexMatrix64::from_real_fn(4, 4, |i, j| if i == j { -1.0 } else { 1.0 });
    let pairs = find_er_pairs(&h).unwrap();
    let mut exact = true;
    let mut rng = seed_rng(7, 0);
    for pair in &pairs {
        for k in 0..200 {
            let alpha = if k < 64 { k as f64 * std::f64::consts::TAU / 64.0 } else { rng.random_range(-10.0..10.0) };
            exact &= inject_parameter(&h, pair, alpha, true).unwrap() == h;
        }
    }
    let mut family = ParametricFamily::new(h.clone(), true);
    for pair in pairs.iter().cloned() {
        family.add_pair(pair).unwrap();
    }
    let collapsed = family.effective_parameters() == 0
        && (0..50).all(|_| {
            let alphas: Vec<f64> = (0..family.num_parameters()).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
            family.evaluate(&alphas).unwrap() == h
        });
    report(
        "7",
        exact && collapsed && !pairs.is_empty(),
        &format!("{} ER pairs, every hermitian injection returns H(0) exactly: {exact}, effective parameters {}", pairs.len(), family.effective_parameters()),
    );
}

#[test]
fn criterion_08_sic_sixteen_purity() {
    let spec = spec_from_dn::<f64>(4, 16, false).unwrap();
    let result = solve_signature(&spec, &config(1000)).unwrap();
    let bp = Bipartition::new(2, 2).unwrap();
    let (pass, detail) = match &result.signature {
        Some(u) => {
            let f = signature_frame(u, 4, Factorization::Eigen).unwrap();
            let p = average_purity(&f, bp).unwrap().average;
            let target = sic_average_purity(bp);
            ((p - 0.8).abs() < 1e-6 && (target - 0.8).abs() < 1e-15, format!("seed {:?}: average purity {p:.12} (4/5 expected)", result.winning_seed_index))
        }
        None => (false, format!("solver did not converge: {:?}", result.status)),
    };
    report("8", pass, &detail);
}

const ALPHA_LB: [f64; 6] = [0.0970, 0.0957, 0.4536, 0.7275, 0.7287, 0.2258];
const ALPHA_UB: [f64; 6] = [2.2222, 2.2233, 3.1401, 0.4173, 2.9043, 2.6317];
const PURITY_LB: f64 = 0.576737;
const PURITY_UB: f64 = 0.804885;

#[test]
fn criterion_09_purity_bounds() {
    let bp = Bipartition::new(2, 3).unwrap();
    let mut reproduced = Vec::new();
    let mut points = Vec::new();
    for factorization in [Factorization::Eigen, Factorization::Cholesky] {
        let family = SignatureFamily::u16(factorization);
        for order in [IndexOrder::AMajor, IndexOrder::BMajor] {
            let low = average_purity_with(&family.frame(&ALPHA_LB).unwrap(), bp, order).unwrap().average;
            let high = average_purity_with(&family.frame(&ALPHA_UB).unwrap(), bp, order).unwrap().average;
            if (low - PURITY_LB).abs() <= 1e-3 && (high - PURITY_UB).abs() <= 1e-3 {
                reproduced.push(format!("{factorization:?}/{order:?}"));
            }
            points.push(format!("{factorization:?}/{order:?} {low:.6}, {high:.6}"));
        }
    }

    let family = SignatureFamily::u16(Factorization::Eigen);
    let config = OptimizerConfig { restarts: 100, ..OptimizerConfig::default() };
    let min = optimize_average_purity(&family, bp, Mode::Min, &config).unwrap();
    let max = optimize_average_purity(&family, bp, Mode::Max, &config).unwrap();
    let min_ok = min.value <= PURITY_LB + 1e-3;
    let max_ok = max.value >= PURITY_UB - 1e-3;

    report(
        "9",
        !reproduced.is_empty() && min_ok && max_ok,
        &format!(
            "point values (alpha_LB, alpha_UB) by convention: {}; conventions reproducing {PURITY_LB} and {PURITY_UB}: {reproduced:?}; \
             100-restart optimum (Eigen/AMajor): min {:.6} (need <= {PURITY_LB}), max {:.6} (need >= {PURITY_UB})",
            points.join("; "),
            min.value,
            max.value
        ),
    );
}

fn fickus_over_scan(config: &SolverConfig) -> (bool, String) {
    let records = scan::<f64>(3, 16, config).unwrap();
    let found: Vec<(usize, usize)> = records.iter().filter(|r| r.found).map(|r| (r.d, r.n)).collect();
    let violations: Vec<&(usize, usize)> = found.iter().filter(|&&(d, n)| !fickus_check(d as u64, n as u64)).collect();
    let detail = format!(
        "{} seeds: {} of {} (d,N) found with N <= 16, divisibility violations {violations:?}",
        config.seeds,
        found.len(),
        records.len()
    );
    (violations.is_empty() && !found.is_empty(), detail)
}

#[test]
fn criterion_10_scan_is_consistent_with_fickus() {
    // 1000 seeds over every (d, N) with N <= 16 take one to two hours on a
    // single core; the ignored test below runs that configuration
    let (ok, detail) = fickus_over_scan(&config(100));
    report("10", ok, &detail);
}

#[test]
#[ignore = "slow: the N <= 16 scan at 1000 seeds per (d, N)"]
fn criterion_10_full_default_scan() {
    let (ok, detail) = fickus_over_scan(&SolverConfig::default());
    report("10 (1000 seeds)", ok, &detail);
}

#[test]
fn criterion_11_property_suites() {
    let mut failures = Vec::new();
    let mut count = 0;
    let mut run = |name: &str, r: support::Check| {
        count += 1;
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };
    for seed in 0..20u64 {
        let n = 3 + (seed as usize % 9);
        run("projection idempotence", support::projection_idempotence(n, 1 + seed as usize % (n / 2), seed));
        run("purity", support::purity_properties(1 + seed as usize % 4, 1 + (seed as usize / 4) % 4, seed));
    }
    for index in 0..support::CONSTRUCTIONS.len() {
        for complement in [false, true] {
            let u = support::equivalent_signature(index, &[0.3, 1.1, 2.9], index as u64 + 17, complement);
            run("Gram-signature roundtrip", support::gram_signature_roundtrip(&u));
        }
        run("Haagerup invariance", support::haagerup_invariance(index, &[0.7, 2.2], index as u64));
    }
    for n in 2..60 {
        for d in 1..n {
            run("Welch identities", support::welch_identities(d, n));
        }
    }
    for r in 0..=10 {
        run("partition counts", support::partition_counts(r));
    }
    report(
        "11",
        failures.is_empty(),
        &format!("{count} checks, {} failures {failures:?}; standalone suite: cargo test -p etf-core --test properties", failures.len()),
    );
}
