//! Property checks shared by the proptest suite and the acceptance run.
//! Each check takes plain inputs and returns a description of the first
//! violated property.

#![allow(dead_code)]

use etf_core::construct::{build_construction, certify_inequivalent, partition_count, partitions, Equivalence};
use etf_core::entangle::{partial_trace, purity, Bipartition};
use etf_core::solver::{hermitize_and_fix_diagonal, impose_moduli, orthonormalize_columns, seed_matrix, seed_rng};
use etf_core::{
    gram_from_signature, k_parameter, signature_from_gram, target_bistochastic, welch_bound, ComplexMatrix64,
    SignatureUnitary64, C64,
};

pub type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn random_matrix(n: usize, seed: u64) -> ComplexMatrix64 {
    seed_matrix(n, false, &mut seed_rng(seed, 0))
}

/// Haar-like unitary from the QR of a Gaussian matrix.
pub fn random_unitary(n: usize, seed: u64) -> ComplexMatrix64 {
    orthonormalize_columns(&random_matrix(n, seed)).expect("Gaussian matrices are full rank")
}

pub fn projection_idempotence(n: usize, d: usize, seed: u64) -> Check {
    let cos = 1.0 - 2.0 * d as f64 / n as f64;
    let b = target_bistochastic(n, cos.acos().min(std::f64::consts::FRAC_PI_2)).map_err(|e| e.to_string())?;
    let a = random_matrix(n, seed);

    let once = impose_moduli(&a, &b);
    let twice = impose_moduli(&once, &b);
    ensure(once.max_abs_diff(&twice) < 1e-14, || format!("impose_moduli not idempotent: {:e}", once.max_abs_diff(&twice)))?;

    let once = hermitize_and_fix_diagonal(&a, cos);
    let twice = hermitize_and_fix_diagonal(&once, cos);
    ensure(once.max_abs_diff(&twice) < 1e-14, || format!("hermitize not idempotent: {:e}", once.max_abs_diff(&twice)))?;

    let once = orthonormalize_columns(&a).map_err(|e| e.to_string())?;
    let twice = orthonormalize_columns(&once).map_err(|e| e.to_string())?;
    ensure(once.max_abs_diff(&twice) < 1e-12, || format!("Gram-Schmidt not idempotent: {:e}", once.max_abs_diff(&twice)))?;
    ensure(once.unitarity_deviation() < 1e-12, || "Gram-Schmidt output not unitary".into())
}

pub const CONSTRUCTIONS: [&str; 6] =
    ["fourier:2", "fourier:3", "fourier:4", "fourier:5", "tensor(fourier:2,fourier:2)", "tensor(fourier:2,fourier:3)"];

/// A switching-equivalent copy `P D U D† P†` of a known signature, optionally
/// negated to land on the complement.
pub fn equivalent_signature(index: usize, phases: &[f64], perm_seed: u64, complement: bool) -> SignatureUnitary64 {
    let u = build_construction::<f64>(CONSTRUCTIONS[index % CONSTRUCTIONS.len()]).expect("construction");
    let n = u.n();
    let phase = |i: usize| C64::from_polar(1.0, phases[i % phases.len()] * (1.0 + i as f64));
    let mut perm: Vec<usize> = (0..n).collect();
    let mut state = perm_seed | 1;
    for i in (1..n).rev() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        perm.swap(i, (state % (i as u64 + 1)) as usize);
    }
    let m = u.matrix();
    let sign = if complement { -1.0 } else { 1.0 };
    let out = ComplexMatrix64::from_fn(n, n, |i, j| {
        let (p, q) = (perm[i], perm[j]);
        m[(p, q)] * phase(p) * phase(q).conj() * sign
    });
    SignatureUnitary64::new(out, 1e-10).expect("switching preserves the signature conditions")
}

pub fn gram_signature_roundtrip(u: &SignatureUnitary64) -> Check {
    let d = u.dimension();
    let g = gram_from_signature(u, d).map_err(|e| e.to_string())?;
    let back = signature_from_gram(g.matrix(), d).map_err(|e| e.to_string())?;
    let err = back.matrix().max_abs_diff(u.matrix());
    ensure(err < 1e-12, || format!("U -> G -> U drift {err:e}"))?;
    let again = gram_from_signature(&back, d).map_err(|e| e.to_string())?;
    let err = again.matrix().max_abs_diff(g.matrix());
    ensure(err < 1e-12, || format!("G -> U -> G drift {err:e}"))
}

pub fn welch_identities(d: usize, n: usize) -> Check {
    let (df, nf) = (d as f64, n as f64);
    let alpha: f64 = welch_bound(d, n).map_err(|e| e.to_string())?;
    let k: f64 = k_parameter(d, n).map_err(|e| e.to_string())?;
    let cos = 1.0 - 2.0 * df / nf;
    let sin2 = 1.0 - cos * cos;
    let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));

    // θ = 2 asin sqrt(d/N)
    let theta = 2.0 * (df / nf).sqrt().asin();
    ensure(rel(theta.cos(), cos), || format!("cos θ mismatch for ({d}, {n})"))?;
    // the Gram off-diagonal modulus (N/2d)·sqrt(sin²θ/(N−1)) is the Welch bound 1/α
    let overlap = nf / (2.0 * df) * (sin2 / (nf - 1.0)).sqrt();
    ensure(rel(overlap, 1.0 / alpha), || format!("1/α mismatch for ({d}, {n}): {overlap} vs {}", 1.0 / alpha))?;
    // k = cot θ · sqrt(N − 1)
    if sin2 > 0.0 {
        ensure(rel(k, cos / sin2.sqrt() * (nf - 1.0).sqrt()), || format!("k mismatch for ({d}, {n})"))?;
    }
    // complement: k(N − d) = −k(d), α(d)·α(N − d) = N − 1
    let kc: f64 = k_parameter(n - d, n).map_err(|e| e.to_string())?;
    let ac: f64 = welch_bound(n - d, n).map_err(|e| e.to_string())?;
    ensure(rel(kc, -k), || format!("k not odd under complement for ({d}, {n})"))?;
    ensure(rel(alpha * ac, nf - 1.0), || format!("α·α' ≠ N − 1 for ({d}, {n})"))?;
    if 2 * d <= n {
        let b = target_bistochastic(n, theta).map_err(|e| e.to_string())?;
        for i in 0..n {
            let row: f64 = b.row(i).iter().map(|z| z.re).sum();
            ensure(rel(row, 1.0), || format!("row {i} of B sums to {row}"))?;
        }
    }
    Ok(())
}

/// Haagerup sets of `H` and `P D1 H D2 Q` agree.
pub fn haagerup_invariance(index: usize, phases: &[f64], perm_seed: u64) -> Check {
    let u = build_construction::<f64>(CONSTRUCTIONS[index % CONSTRUCTIONS.len()]).expect("construction");
    let m = u.matrix();
    let n = m.rows();
    let rows: Vec<usize> = (0..n).map(|i| (i * (2 * (perm_seed as usize % n) + 1) + 3) % n).collect();
    let cols: Vec<usize> = (0..n).rev().collect();
    let row_phase = |i: usize| C64::from_polar(1.0, phases[i % phases.len()]);
    let col_phase = |j: usize| C64::from_polar(1.0, -1.7 * phases[(j + 1) % phases.len()]);
    let moved = ComplexMatrix64::from_fn(n, n, |i, j| m[(i, j)] * row_phase(i) * col_phase(j));
    // (2s + 1)·i + 3 is a bijection mod n only when gcd(2s + 1, n) = 1
    let mut sorted = rows.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let rows = if sorted.len() == n { rows } else { (0..n).collect() };
    let equivalent = moved.permute(&rows, &cols);
    match certify_inequivalent(m, &equivalent).map_err(|e| e.to_string())? {
        Equivalence::Inconclusive => Ok(()),
        Equivalence::Inequivalent => Err(format!("construction {index} certified inequivalent to a copy of itself")),
    }
}

pub fn random_state(dim: usize, seed: u64) -> Vec<C64> {
    let col = random_matrix(dim, seed).column(0);
    let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    col.into_iter().map(|z| z / norm).collect()
}

fn apply(m: &ComplexMatrix64, v: &[C64]) -> Vec<C64> {
    (0..m.rows()).map(|i| m.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Swaps the tensor factors of an A-major vector.
fn swap_factors(v: &[C64], bp: Bipartition) -> Vec<C64> {
    (0..bp.dim()).map(|idx| v[(idx % bp.d_a) * bp.d_b + idx / bp.d_a]).collect()
}

pub fn purity_properties(d_a: usize, d_b: usize, seed: u64) -> Check {
    let bp = Bipartition::new(d_a, d_b).map_err(|e| e.to_string())?;
    let psi = random_state(bp.dim(), seed);
    let p = purity(&partial_trace(&psi, bp).map_err(|e| e.to_string())?);
    let lower = 1.0 / d_a.min(d_b) as f64;
    ensure(p >= lower - 1e-12 && p <= 1.0 + 1e-12, || format!("purity {p} outside [{lower}, 1]"))?;

    let p_b = purity(&partial_trace(&swap_factors(&psi, bp), bp.swapped()).map_err(|e| e.to_string())?);
    ensure((p - p_b).abs() < 1e-12, || format!("Tr ρ_A² = {p} but Tr ρ_B² = {p_b}"))?;

    let local = random_unitary(d_a, seed ^ 0xA5A5).kron(&random_unitary(d_b, seed ^ 0x5A5A));
    let moved = apply(&local, &psi);
    let p_moved = purity(&partial_trace(&moved, bp).map_err(|e| e.to_string())?);
    ensure((p - p_moved).abs() < 1e-12, || format!("local unitary changed purity {p} -> {p_moved}"))?;

    let product: Vec<C64> = {
        let (a, b) = (random_state(d_a, seed + 1), random_state(d_b, seed + 2));
        a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
    };
    let p_product = purity(&partial_trace(&product, bp).map_err(|e| e.to_string())?);
    ensure((p_product - 1.0).abs() < 1e-12, || format!("product state purity {p_product}"))
}

/// Partitions of `r` counted by filtering all compositions.
pub fn brute_force_partitions(r: usize) -> usize {
    if r == 0 {
        return 1;
    }
    let mut seen = std::collections::BTreeSet::new();
    for mask in 0..(1u32 << (r - 1)) {
        let mut parts = Vec::new();
        let mut run = 1;
        for bit in 0..r - 1 {
            if mask & (1 << bit) != 0 {
                parts.push(run);
                run = 1;
            } else {
                run += 1;
            }
        }
        parts.push(run);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        seen.insert(parts);
    }
    seen.len()
}

pub fn partition_counts(r: usize) -> Check {
    let listed = partitions(r);
    let brute = brute_force_partitions(r);
    ensure(listed.partitions.len() == brute, || format!("partitions({r}) lists {} but brute force finds {brute}", listed.partitions.len()))?;
    ensure(partition_count(r) == brute as u128, || format!("P({r}) = {} but brute force finds {brute}", partition_count(r)))?;
    let all_valid = listed.partitions.iter().all(|p| p.iter().sum::<usize>() == r && p.windows(2).all(|w| w[0] >= w[1]));
    ensure(all_valid, || format!("partitions({r}) has an invalid entry"))
}
